#pragma once

#include <map>
#include <string>
#include <vector>

namespace nvqo {

/// Error rate and duration of one gate kind. Times are in microseconds.
struct GateParams {
    double error = 0.0;
    double time = 0.0;
};

/// Device noise parameters (depolarizing gate errors plus T1/T2 relaxation),
/// stored unscaled together with a strength factor f. Accessors return the
/// scaled values: errors times f, T1 and T2 divided by f, gate times as is.
class NoiseTable {
  public:
    /// Averages for a 2019-era superconducting device.
    NoiseTable();

    double scale() const { return scale_; }
    NoiseTable with_scale(double f) const;

    double t1(int qubit) const;
    double t2(int qubit) const;
    GateParams gate(const std::string& kind) const;

    /// Throws ConfigError if a scaled entry is invalid (T2 > 2 T1, negative values).
    void validate() const;

    // Unscaled storage, public so the parser and tests can fill it in.
    double default_t1 = 55.0;
    double default_t2 = 68.0;
    std::vector<double> qubit_t1;  // per-qubit overrides, empty or one per qubit
    std::vector<double> qubit_t2;
    std::map<std::string, GateParams> gates;

  private:
    double scale_ = 1.0;
    friend NoiseTable parse_noise_table(const std::string&);
};

/// Known gate kinds: "single-qubit", "two-qubit", "U1", "U2", "U3", "CNOT".
bool is_known_gate_kind(const std::string& kind);

/// JSON document. Every field is optional:
///   {"time_unit": "us"|"ns"|"ms", "scale": f, "t1": x, "t2": x,
///    "qubits": [{"t1": x, "t2": x}, ...],
///    "gates": {"single-qubit": {"error": e, "time": t}, ...}}
/// Empty (or whitespace-only) text gives the defaults.
NoiseTable parse_noise_table(const std::string& text);
NoiseTable ingest_noise_table(const std::string& path);

}  // namespace nvqo
