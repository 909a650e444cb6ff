#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace rrl {

// Raised for malformed or physically invalid input. `path` names the offending
// field, e.g. "links[2].capacity".
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Link {
    std::string id;
    int tail = -1;  // sensor index
    int head = -1;  // sensor index, or -1 when the head is a sink
    std::string head_id;
    double capacity = 0.0;  // bit/s
    double distance = 0.0;  // m
};

// Every sensor node is a source with exactly one route, so source index and
// sensor index coincide.
struct NetworkInstance {
    std::vector<std::string> sensor_nodes;
    std::vector<std::string> sink_nodes;
    std::vector<Link> links;
    std::vector<std::vector<int>> routes;  // source -> ordered link indices
    std::vector<double> initial_energy;    // J
    double rx_energy_per_bit = 0.0;        // p^r, J/bit
    double tx_electronics = 0.0;           // psi, J/bit
    double tx_amplifier = 0.0;             // sigma, J/bit/m^theta
    double path_loss_exponent = 0.0;       // theta

    std::size_t num_sources() const { return sensor_nodes.size(); }
    std::size_t num_links() const { return links.size(); }
    int sensor_index(const std::string& id) const;
    int link_index(const std::string& id) const;
};

// One (link, source) pair of the capacity split.
struct Pair {
    int link;
    int source;
    int hop;  // position of the link on the source's route
};

// Relay s' forwarding traffic of source s: receives on link_in, sends on link_out.
struct RelayHop {
    int relay;
    int source;
    int link_in;
    int link_out;
    double power;  // p^(s',s) = p^r + p^t of link_out, J/bit
};

struct DerivedSets {
    std::vector<Pair> pairs;                       // source-major, route order
    std::vector<std::vector<int>> pair_of;         // [s][hop] -> pair index
    std::vector<std::vector<int>> sources_on_link; // l -> sources, ascending
    std::vector<std::vector<int>> pairs_on_link;   // l -> pair indices, same order
    std::vector<std::vector<int>> links_of_source;
    std::vector<std::vector<int>> incoming_links;  // s -> route-induced links with head s
    std::vector<std::vector<int>> outgoing_links;  // s -> route-induced links with tail s
    std::vector<std::vector<int>> relayed_sources; // s -> S_in(s)
    std::vector<std::vector<int>> relays_of_source;// s -> S_t(s), route order
    std::vector<RelayHop> relay_hops;
    std::vector<std::vector<int>> hops_at_relay;   // s -> relay_hops where s relays
    std::vector<std::vector<int>> hops_of_source;  // s -> relay_hops on s's route
    std::vector<int> own_link;                     // s -> l_s
    std::vector<double> own_tx_power;              // s -> p^t_{s,l_s}
    std::vector<double> link_tx_power;             // l -> p^t at the link's tail
};

NetworkInstance build_instance(const nlohmann::json& doc);
NetworkInstance load_instance(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

DerivedSets derive_sets(const NetworkInstance& inst);

// p^t = psi + sigma d^theta for link l leaving sensor s.
double transmit_power(const NetworkInstance& inst, int s, int l);

// Total power of sensor s under rates x (bit/s), summed per incoming and
// outgoing link.
double node_power(const NetworkInstance& inst, const DerivedSets& sets,
                  const std::vector<double>& x, int s);

// Same quantity grouped per relayed source: x_s p^t_{s,l_s} + sum x_s' p^(s,s').
double node_power_relay_form(const DerivedSets& sets, const std::vector<double>& x, int s);

double node_lifetime(const NetworkInstance& inst, double p_s, int s);
double network_lifetime(const NetworkInstance& inst, const DerivedSets& sets,
                        const std::vector<double>& x);

}  // namespace rrl
