#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diffcodec/codec.hpp"
#include "diffcodec/datamanifold.hpp"
#include "json.hpp"

namespace diffcodec::cli {

enum ExitCode : int {
    kOk = 0,
    kParseError = 1,
    kCertificationFailure = 2,
    kIoError = 3,
    kCorruptStream = 4,
    kUnknownNodeSet = 5,
    kThresholdViolation = 6,
    kAuditFailure = 7,
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Thresholds {
    // Error slope must be ≤ −s + rate_slack.
    double rate_slack = 0.3;
    // Bit slope must lie in [α/s − bits_lower, α/s + bits_upper].
    double bits_lower = 0.25;
    double bits_upper = 0.45;
    // Entropy slope within ±entropy_rel·α/s.
    double entropy_rel = 0.35;
    // Linear-width slope must be ≤ −s/α + width_slack.
    double width_slack = 0.2;
    // Bernstein constants fit in [(1 − rel)C, (1 + rel)C] for one C.
    double bernstein_rel = 0.25;
    double quadrature = 1e-10;
    double mz = 1e-10;
    double growth_rel = 0.1;
    double product = 1e-10;
    double frame = 1e-11;
    double localization_spread = 10.0;
};

struct RunConfig {
    // "S1", "T2", "S2" or "graph".
    std::string space = "S1";
    std::optional<double> lambda_cap;
    // Graph spaces: a saved DMGS file, or a CSV cloud with bandwidth and K.
    std::string graph_file;
    std::string cloud;
    double bandwidth = 0.0;
    std::size_t K = 0;
    std::optional<double> calibrate_lambda1;
    std::string metric = "euclidean";
    std::size_t knn = 8;

    std::string filter = "standard";
    double s = 1.0;
    std::optional<double> S;
    double p = 2.0;
    std::vector<double> N{8, 16, 32, 64, 128};
    std::vector<double> audit_N{4, 8, 16, 32, 64};
    double r = 1.0;
    std::uint64_t seed = 1;
    std::string output_dir;

    // Smoothness of the synthetic sweep input; defaults to s.
    std::optional<double> family_s;
    std::optional<double> family_band;
    bool sup_error = true;
    std::size_t entropy_trials = 20000;
    double entropy_N = 4.0;
    int bernstein_trials = 100;
    Thresholds thresholds;

    // max(1, s) + 1 unless S is given.
    double codec_S() const;
    double max_N() const;
};

// Rejects unknown keys, wrong types and out-of-range values with ParseError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);

// ParseError carries the line and column of malformed text.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);
std::string read_text_file(const std::string& path);

std::unique_ptr<Space> make_config_space(const RunConfig& c);
Filter make_config_filter(const RunConfig& c);

// {"coeffs": [...], "tail": {"scale": a, "q": b}}; "space" is optional.
SpectralInput read_spectral_json(const std::string& path, const std::string& space_id);
// One value per line, in node order.
Eigen::VectorXd read_samples_csv(const std::string& path);

struct EncodeOptions {
    std::string input;
    std::string out;
    std::optional<double> N;
    std::string mode = "global";
    std::optional<Point> center;
    std::optional<double> radius;
    // Local mode: encode f times the cut-off with this inner radius.
    std::optional<double> cutoff_inner;
};

struct DecodeOptions {
    std::string stream;
    std::string out;
    // "spectral" or "grid".
    std::string format = "spectral";
    std::optional<double> grid;
};

int cmd_encode(const RunConfig& c, const EncodeOptions& o, std::ostream& out, std::ostream& err);
int cmd_decode(const RunConfig& c, const DecodeOptions& o, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& c, const std::string& input, bool dry_run, std::ostream& out, std::ostream& err);
int cmd_audit(const RunConfig& c, const std::string& quadrature_file, std::ostream& out, std::ostream& err);
int cmd_frame_check(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_kernel_decay(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_entropy(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_widths(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_build_graph(const RunConfig& c, const std::string& path, std::ostream& out, std::ostream& err);

// Full command line, program name excluded. Maps exceptions to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diffcodec::cli
