#pragma once

#include <random>
#include <string>

#include <json.hpp>

#include "rrl/model.hpp"
#include "rrl/objective.hpp"

namespace testutil {

inline std::string data(const std::string& name) { return std::string(RRL_DATA_DIR) + "/" + name; }
inline std::string fixture(const std::string& name) { return std::string(RRL_FIXTURE_DIR) + "/" + name; }

inline nlohmann::json canonical_doc() { return rrl::read_json_file(data("canonical_instance.json")); }

inline nlohmann::json radio() {
    return {{"psi", 50e-9}, {"sigma", 0.0013e-12}, {"theta", 4}, {"rx", 50e-9}};
}

// Chain of `n` sensors 1 -> 2 -> ... -> n -> sink where every sensor sources
// a flow to the sink along the rest of the chain.
inline nlohmann::json chain_doc(int n, double capacity = 2.0, double distance = 40.0) {
    nlohmann::json doc;
    doc["nodes"] = nlohmann::json::array();
    doc["links"] = nlohmann::json::array();
    for (int i = 1; i <= n; ++i) doc["nodes"].push_back({{"id", std::to_string(i)}, {"kind", "sensor"}, {"energy", 2000}});
    doc["nodes"].push_back({{"id", "sink"}, {"kind", "sink"}});
    for (int i = 1; i <= n; ++i) {
        std::string head = i == n ? "sink" : std::to_string(i + 1);
        doc["links"].push_back({{"id", "l" + std::to_string(i)},
                                {"tail", std::to_string(i)},
                                {"head", head},
                                {"capacity", capacity},
                                {"distance", distance}});
    }
    doc["routes"] = nlohmann::json::object();
    for (int i = 1; i <= n; ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (int k = i; k <= n; ++k) r.push_back("l" + std::to_string(k));
        doc["routes"][std::to_string(i)] = r;
    }
    doc["radio"] = radio();
    return doc;
}

// Canonical topology with energies, capacities and distances drawn at random.
inline nlohmann::json random_canonical(std::mt19937_64& rng) {
    nlohmann::json doc = canonical_doc();
    std::uniform_real_distribution<double> e(1500, 3500), c(1.5, 4.5), d(20, 80);
    for (auto& n : doc["nodes"])
        if (n["kind"] == "sensor") n["energy"] = e(rng);
    for (auto& l : doc["links"]) {
        l["capacity"] = c(rng);
        l["distance"] = d(rng);
    }
    return doc;
}

}  // namespace testutil
