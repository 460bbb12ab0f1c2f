#include "nvqo/noise_table.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "nvqo/error.hpp"

namespace nvqo {
namespace {

const std::map<std::string, GateParams>& default_gates() {
    static const std::map<std::string, GateParams> table = {
        {"single-qubit", {1e-3, 0.08}}, {"two-qubit", {4e-2, 0.7}}, {"U1", {0.0, 0.0}},
        {"U2", {1e-3, 0.08}},          {"U3", {3e-3, 0.08}},        {"CNOT", {4e-2, 0.7}},
    };
    return table;
}

double divide_time(double t, double f) {
    if (f == 0.0) return std::numeric_limits<double>::infinity();
    return t / f;
}

double time_factor(const std::string& unit) {
    if (unit == "us") return 1.0;
    if (unit == "ns") return 1e-3;
    if (unit == "ms") return 1e3;
    throw ConfigError("noise table: unknown time_unit '" + unit + "'");
}

double number(const nlohmann::json& j, const char* key) {
    if (!j.is_number()) throw ConfigError(std::string("noise table: '") + key + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("noise table: '") + key + "' must be >= 0");
    return v;
}

}  // namespace

NoiseTable::NoiseTable() : gates(default_gates()) {}

NoiseTable NoiseTable::with_scale(double f) const {
    if (!std::isfinite(f) || f < 0.0) throw ConfigError("noise table: scale must be a finite value >= 0");
    NoiseTable out = *this;
    out.scale_ = f;
    return out;
}

double NoiseTable::t1(int qubit) const {
    const auto q = static_cast<std::size_t>(qubit);
    return divide_time(q < qubit_t1.size() ? qubit_t1[q] : default_t1, scale_);
}

double NoiseTable::t2(int qubit) const {
    const auto q = static_cast<std::size_t>(qubit);
    return divide_time(q < qubit_t2.size() ? qubit_t2[q] : default_t2, scale_);
}

GateParams NoiseTable::gate(const std::string& kind) const {
    auto it = gates.find(kind);
    if (it == gates.end()) throw ConfigError("noise table: unknown gate kind '" + kind + "'");
    GateParams p = it->second;
    p.error *= scale_;
    if (p.error > 1.0) throw ConfigError("noise table: scaled error of '" + kind + "' exceeds 1");
    return p;
}

void NoiseTable::validate() const {
    auto check_pair = [&](double t1v, double t2v) {
        if (!(t1v > 0.0) || !(t2v > 0.0)) throw ConfigError("noise table: T1 and T2 must be positive");
        if (t2v > 2.0 * t1v) throw ConfigError("noise table: T2 exceeds 2 T1");
    };
    check_pair(default_t1, default_t2);
    if (!qubit_t1.empty() && qubit_t1.size() != qubit_t2.size()) {
        throw ConfigError("noise table: per-qubit T1 and T2 lists differ in length");
    }
    for (std::size_t q = 0; q < qubit_t1.size(); ++q) check_pair(qubit_t1[q], qubit_t2[q]);
    for (const auto& [kind, p] : gates) {
        if (!is_known_gate_kind(kind)) throw ConfigError("noise table: unknown gate kind '" + kind + "'");
        if (p.error < 0.0 || p.time < 0.0) throw ConfigError("noise table: negative entry for '" + kind + "'");
        if (p.error * scale_ > 1.0) throw ConfigError("noise table: scaled error of '" + kind + "' exceeds 1");
    }
}

bool is_known_gate_kind(const std::string& kind) { return default_gates().count(kind) > 0; }

NoiseTable parse_noise_table(const std::string& text) {
    NoiseTable table;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return table;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("noise table: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("noise table: top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "time_unit" && key != "scale" && key != "t1" && key != "t2" && key != "qubits" && key != "gates") {
            throw ConfigError("noise table: unknown field '" + key + "'");
        }
    }
    const double unit = doc.contains("time_unit") ? time_factor(doc["time_unit"].get<std::string>()) : 1.0;
    if (doc.contains("t1")) table.default_t1 = unit * number(doc["t1"], "t1");
    if (doc.contains("t2")) table.default_t2 = unit * number(doc["t2"], "t2");
    if (doc.contains("qubits")) {
        if (!doc["qubits"].is_array()) throw ConfigError("noise table: 'qubits' must be an array");
        for (const auto& q : doc["qubits"]) {
            table.qubit_t1.push_back(q.contains("t1") ? unit * number(q["t1"], "t1") : table.default_t1);
            table.qubit_t2.push_back(q.contains("t2") ? unit * number(q["t2"], "t2") : table.default_t2);
        }
    }
    if (doc.contains("gates")) {
        if (!doc["gates"].is_object()) throw ConfigError("noise table: 'gates' must be an object");
        for (const auto& [kind, entry] : doc["gates"].items()) {
            if (!is_known_gate_kind(kind)) throw ConfigError("noise table: unknown gate kind '" + kind + "'");
            GateParams p = table.gates.at(kind);
            if (entry.contains("error")) p.error = number(entry["error"], "error");
            if (entry.contains("time")) p.time = unit * number(entry["time"], "time");
            table.gates[kind] = p;
        }
    }
    if (doc.contains("scale")) table.scale_ = number(doc["scale"], "scale");
    table.validate();
    return table;
}

NoiseTable ingest_noise_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open noise table '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_noise_table(buf.str());
}

}  // namespace nvqo
