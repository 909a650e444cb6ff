#include "rrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace rrl {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = std::any_of(allowed.begin(), allowed.end(),
                              [&](const char* k) { return it.key() == k; });
        if (!ok) throw ValidationError(path + "." + it.key(), "unknown field");
    }
}

const json& require(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "." + key, "missing field");
    return *it;
}

double positive_number(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_number()) throw ValidationError(path + "." + key, "expected a number");
    double d = v.get<double>();
    if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError(path + "." + key, "must be positive");
    return d;
}

std::string string_field(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_string()) throw ValidationError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

}  // namespace

int NetworkInstance::sensor_index(const std::string& id) const {
    auto it = std::find(sensor_nodes.begin(), sensor_nodes.end(), id);
    return it == sensor_nodes.end() ? -1 : static_cast<int>(it - sensor_nodes.begin());
}

int NetworkInstance::link_index(const std::string& id) const {
    for (std::size_t l = 0; l < links.size(); ++l)
        if (links[l].id == id) return static_cast<int>(l);
    return -1;
}

NetworkInstance build_instance(const json& doc) {
    NetworkInstance inst;
    check_keys(doc, "instance", {"nodes", "links", "routes", "radio"});

    const json& nodes = require(doc, "instance", "nodes");
    if (!nodes.is_array() || nodes.empty()) throw ValidationError("nodes", "expected a non-empty array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::string path = "nodes[" + std::to_string(i) + "]";
        const json& n = nodes[i];
        check_keys(n, path, {"id", "kind", "energy"});
        std::string id = string_field(n, path, "id");
        if (!seen.insert(id).second) throw ValidationError(path + ".id", "duplicate node id '" + id + "'");
        std::string kind = string_field(n, path, "kind");
        if (kind == "sensor") {
            inst.sensor_nodes.push_back(id);
            inst.initial_energy.push_back(positive_number(n, path, "energy"));
        } else if (kind == "sink") {
            if (n.contains("energy")) throw ValidationError(path + ".energy", "sinks carry no energy budget");
            inst.sink_nodes.push_back(id);
        } else {
            throw ValidationError(path + ".kind", "expected 'sensor' or 'sink'");
        }
    }
    if (inst.sensor_nodes.empty()) throw ValidationError("nodes", "no sensor nodes");
    if (inst.sink_nodes.empty()) throw ValidationError("nodes", "no sink nodes");

    const json& radio = require(doc, "instance", "radio");
    check_keys(radio, "radio", {"psi", "sigma", "theta", "rx"});
    inst.tx_electronics = positive_number(radio, "radio", "psi");
    inst.tx_amplifier = positive_number(radio, "radio", "sigma");
    inst.path_loss_exponent = positive_number(radio, "radio", "theta");
    inst.rx_energy_per_bit = positive_number(radio, "radio", "rx");
    if (inst.path_loss_exponent < 2.0 || inst.path_loss_exponent > 4.0)
        throw ValidationError("radio.theta", "path loss exponent must lie in [2, 4]");

    const json& links = require(doc, "instance", "links");
    if (!links.is_array() || links.empty()) throw ValidationError("links", "expected a non-empty array");
    std::set<std::string> link_ids;
    for (std::size_t i = 0; i < links.size(); ++i) {
        std::string path = "links[" + std::to_string(i) + "]";
        const json& lj = links[i];
        check_keys(lj, path, {"id", "tail", "head", "capacity", "distance"});
        Link link;
        link.id = string_field(lj, path, "id");
        if (!link_ids.insert(link.id).second)
            throw ValidationError(path + ".id", "duplicate link id '" + link.id + "'");
        std::string tail = string_field(lj, path, "tail");
        std::string head = string_field(lj, path, "head");
        link.tail = inst.sensor_index(tail);
        if (link.tail < 0) {
            if (std::find(inst.sink_nodes.begin(), inst.sink_nodes.end(), tail) != inst.sink_nodes.end())
                throw ValidationError(path + ".tail", "links may not leave a sink");
            throw ValidationError(path + ".tail", "unknown node '" + tail + "'");
        }
        link.head = inst.sensor_index(head);
        if (link.head < 0 &&
            std::find(inst.sink_nodes.begin(), inst.sink_nodes.end(), head) == inst.sink_nodes.end())
            throw ValidationError(path + ".head", "unknown node '" + head + "'");
        if (link.head == link.tail) throw ValidationError(path + ".head", "self loop");
        link.head_id = head;
        link.capacity = positive_number(lj, path, "capacity") * 1e6;
        link.distance = positive_number(lj, path, "distance");
        inst.links.push_back(link);
    }

    const json& routes = require(doc, "instance", "routes");
    if (!routes.is_object()) throw ValidationError("routes", "expected an object keyed by source id");
    inst.routes.assign(inst.sensor_nodes.size(), {});
    std::vector<bool> has_route(inst.sensor_nodes.size(), false);
    for (auto it = routes.begin(); it != routes.end(); ++it) {
        std::string path = "routes." + it.key();
        int s = inst.sensor_index(it.key());
        if (s < 0) throw ValidationError(path, "route source is not a sensor node");
        const json& r = it.value();
        if (!r.is_array() || r.empty()) throw ValidationError(path, "expected a non-empty link list");
        std::vector<int> route;
        for (std::size_t k = 0; k < r.size(); ++k) {
            std::string kp = path + "[" + std::to_string(k) + "]";
            if (!r[k].is_string()) throw ValidationError(kp, "expected a link id");
            int l = inst.link_index(r[k].get<std::string>());
            if (l < 0) throw ValidationError(kp, "unknown link '" + r[k].get<std::string>() + "'");
            if (std::find(route.begin(), route.end(), l) != route.end())
                throw ValidationError(kp, "link repeated on route");
            const Link& link = inst.links[l];
            if (k == 0 && link.tail != s) throw ValidationError(kp, "route does not start at its source");
            if (k > 0 && inst.links[route.back()].head != link.tail)
                throw ValidationError(kp, "route is disconnected");
            route.push_back(l);
        }
        if (inst.links[route.back()].head >= 0)
            throw ValidationError(path, "route does not terminate at sink");
        for (std::size_t k = 0; k + 1 < route.size(); ++k)
            if (inst.links[route[k]].head < 0)
                throw ValidationError(path, "route passes through a sink before its end");
        inst.routes[s] = route;
        has_route[s] = true;
    }
    for (std::size_t s = 0; s < has_route.size(); ++s)
        if (!has_route[s]) throw ValidationError("routes." + inst.sensor_nodes[s], "sensor has no route");
    return inst;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path, std::string("parse error: ") + e.what());
    }
}

NetworkInstance load_instance(const std::string& path) { return build_instance(read_json_file(path)); }

double transmit_power(const NetworkInstance& inst, int s, int l) {
    if (l < 0 || static_cast<std::size_t>(l) >= inst.links.size() || inst.links[l].tail != s)
        throw std::invalid_argument("link is not outgoing from the node");
    return inst.tx_electronics +
           inst.tx_amplifier * std::pow(inst.links[l].distance, inst.path_loss_exponent);
}

DerivedSets derive_sets(const NetworkInstance& inst) {
    const std::size_t S = inst.num_sources(), L = inst.num_links();
    DerivedSets d;
    d.pair_of.resize(S);
    d.sources_on_link.resize(L);
    d.pairs_on_link.resize(L);
    d.links_of_source = inst.routes;
    d.incoming_links.resize(S);
    d.outgoing_links.resize(S);
    d.relayed_sources.resize(S);
    d.relays_of_source.resize(S);
    d.hops_at_relay.resize(S);
    d.hops_of_source.resize(S);
    d.own_link.resize(S);
    d.own_tx_power.resize(S);
    d.link_tx_power.resize(L);

    for (std::size_t l = 0; l < L; ++l)
        d.link_tx_power[l] = transmit_power(inst, inst.links[l].tail, static_cast<int>(l));

    for (std::size_t s = 0; s < S; ++s) {
        const auto& route = inst.routes[s];
        for (std::size_t k = 0; k < route.size(); ++k) {
            int l = route[k];
            int idx = static_cast<int>(d.pairs.size());
            d.pairs.push_back({l, static_cast<int>(s), static_cast<int>(k)});
            d.pair_of[s].push_back(idx);
            d.sources_on_link[l].push_back(static_cast<int>(s));
            d.pairs_on_link[l].push_back(idx);
        }
        d.own_link[s] = route.front();
        d.own_tx_power[s] = d.link_tx_power[route.front()];
        for (std::size_t k = 1; k < route.size(); ++k) {
            RelayHop h;
            h.relay = inst.links[route[k]].tail;
            h.source = static_cast<int>(s);
            h.link_in = route[k - 1];
            h.link_out = route[k];
            h.power = inst.rx_energy_per_bit + d.link_tx_power[route[k]];
            int hi = static_cast<int>(d.relay_hops.size());
            d.relay_hops.push_back(h);
            d.hops_at_relay[h.relay].push_back(hi);
            d.hops_of_source[s].push_back(hi);
            d.relays_of_source[s].push_back(h.relay);
        }
    }
    for (std::size_t s = 0; s < S; ++s) {
        for (int hi : d.hops_at_relay[s]) d.relayed_sources[s].push_back(d.relay_hops[hi].source);
        std::sort(d.relayed_sources[s].begin(), d.relayed_sources[s].end());
    }
    for (std::size_t l = 0; l < L; ++l) {
        if (d.sources_on_link[l].empty()) continue;
        const Link& link = inst.links[l];
        d.outgoing_links[link.tail].push_back(static_cast<int>(l));
        if (link.head >= 0) d.incoming_links[link.head].push_back(static_cast<int>(l));
    }
    return d;
}

double node_power(const NetworkInstance& inst, const DerivedSets& sets, const std::vector<double>& x,
                  int s) {
    double p = 0.0;
    for (int l : sets.incoming_links[s])
        for (int src : sets.sources_on_link[l]) p += inst.rx_energy_per_bit * x[src];
    for (int l : sets.outgoing_links[s])
        for (int src : sets.sources_on_link[l]) p += sets.link_tx_power[l] * x[src];
    return p;
}

double node_power_relay_form(const DerivedSets& sets, const std::vector<double>& x, int s) {
    double p = x[s] * sets.own_tx_power[s];
    for (int hi : sets.hops_at_relay[s]) p += x[sets.relay_hops[hi].source] * sets.relay_hops[hi].power;
    return p;
}

double node_lifetime(const NetworkInstance& inst, double p_s, int s) {
    if (!(p_s > 0.0)) throw std::domain_error("undefined lifetime");
    return inst.initial_energy[s] / p_s;
}

double network_lifetime(const NetworkInstance& inst, const DerivedSets& sets, const std::vector<double>& x) {
    double t = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < inst.num_sources(); ++s)
        t = std::min(t, node_lifetime(inst, node_power(inst, sets, x, static_cast<int>(s)), static_cast<int>(s)));
    return t;
}

}  // namespace rrl
