// baryopt: batch front door for barycentre-based global optimization.
//
// Verbs:
//   optimize      run the sampler + streaming barycentre per seed, emit
//                 trajectory CSVs and a summary JSON
//   temperatures  derive the temperature thresholds from a known minimizer
//                 and emit the full report JSON
//   verify-bounds run chains over a temperature grid and check the
//                 Wasserstein and convexity inequalities row by row
//   compare       barycentre tracking vs simulated annealing over a seed list
//
// All outputs are CSV (RFC 4180, CRLF) or JSON (UTF-8, stable key order),
// written atomically (tmp file + rename). Every artifact embeds the fully
// resolved configuration and the seed(s) that produced it.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "baryopt/annealing.hpp"
#include "baryopt/barycentre.hpp"
#include "baryopt/temperature.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace baryopt;

namespace {

// ---------------------------------------------------------------------------
// formatting and file plumbing

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) {
        append_row(header);
    }

    void append_row(const std::vector<std::string>& fields) {
        if (fields.size() != width_) throw std::logic_error("CsvWriter: ragged row");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) body_ += ',';
            body_ += csv_escape(fields[i]);
        }
        body_ += "\r\n";
    }

    const std::string& str() const { return body_; }

  private:
    std::size_t width_;
    std::string body_;
};

void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const ojson& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty list");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// configuration: parse, validate with explicit error paths, fill defaults

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error("config error at '" + path + "': " + what), json_path(path) {}
    std::string json_path;
};

const ojson& need(const ojson& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path + "." + key, "missing required field");
    return *it;
}

double as_double(const ojson& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

long long as_int(const ojson& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<long long>();
}

std::string as_string(const ojson& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

// fill every defaulted field so artifacts echo the exact configuration used
ojson normalize_config(ojson cfg, const std::string& verb) {
    if (!cfg.is_object()) throw ConfigError("$", "top level must be an object");

    const ojson& man = need(cfg, "manifold", "$");
    const std::string mtype = as_string(need(man, "type", "$.manifold"), "$.manifold.type");
    if (mtype == "sphere") {
        const long long n = as_int(need(man, "n", "$.manifold"), "$.manifold.n");
        if (n < 2) throw ConfigError("$.manifold.n", "sphere dimension must be >= 2");
    } else if (mtype == "grassmann") {
        const long long k = as_int(need(man, "k", "$.manifold"), "$.manifold.k");
        const long long n = as_int(need(man, "n", "$.manifold"), "$.manifold.n");
        if (k < 1 || n < 2 || k >= n)
            throw ConfigError("$.manifold", "grassmann requires 1 <= k < n");
    } else {
        throw ConfigError("$.manifold.type", "unknown manifold type '" + mtype + "'");
    }

    const ojson& obj = need(cfg, "objective", "$");
    const std::string okind = as_string(need(obj, "kind", "$.objective"), "$.objective.kind");
    if (okind != "legendre9" && okind != "grassmann_trace" && okind != "transported")
        throw ConfigError("$.objective.kind", "unknown objective kind '" + okind + "'");

    const std::string mode = as_string(need(cfg, "mode", "$"), "$.mode");
    if (mode != "oracle" && mode != "blind")
        throw ConfigError("$.mode", "mode must be 'oracle' or 'blind'");
    if (mode == "blind") {
        const double t = as_double(need(cfg, "temperature", "$"), "$.temperature");
        if (t <= 0.0) throw ConfigError("$.temperature", "temperature must be positive");
    } else {
        const double d = as_double(need(cfg, "delta", "$"), "$.delta");
        if (d <= 0.0) throw ConfigError("$.delta", "delta must be positive");
        if (cfg.contains("epsilon")) {
            as_double(cfg["epsilon"], "$.epsilon");
        } else {
            cfg["epsilon"] = nullptr;  // module default: 1e-3 of the smaller threshold
        }
        if (!cfg.contains("profile")) cfg["profile"] = ojson::object();
        ojson& prof = cfg["profile"];
        if (!prof.contains("pad")) prof["pad"] = 0.05;
        if (!prof.contains("fd_step")) prof["fd_step"] = 1e-4;
        if (!prof.contains("ball_samples")) prof["ball_samples"] = 10000;
        if (!prof.contains("tail_samples")) prof["tail_samples"] = 1000000;
        if (!prof.contains("seed")) prof["seed"] = 2024;
    }

    if (!cfg.contains("kernel")) cfg["kernel"] = ojson::object();
    ojson& kernel = cfg["kernel"];
    if (!kernel.contains("type")) kernel["type"] = (mtype == "sphere") ? "vmf" : "conjugation";
    const std::string ktype = as_string(kernel["type"], "$.kernel.type");
    if (ktype == "vmf") {
        if (mtype != "sphere") throw ConfigError("$.kernel.type", "vmf kernel requires a sphere");
        if (!kernel.contains("kappa")) kernel["kappa"] = 20.0;
        if (as_double(kernel["kappa"], "$.kernel.kappa") < 0.0)
            throw ConfigError("$.kernel.kappa", "kappa must be nonnegative");
    } else if (ktype == "conjugation") {
        if (mtype != "grassmann")
            throw ConfigError("$.kernel.type", "conjugation kernel requires a grassmannian");
        if (!kernel.contains("step_scale")) kernel["step_scale"] = 0.2;
        if (as_double(kernel["step_scale"], "$.kernel.step_scale") <= 0.0)
            throw ConfigError("$.kernel.step_scale", "step_scale must be positive");
    } else {
        throw ConfigError("$.kernel.type", "unknown kernel type '" + ktype + "'");
    }

    const long long steps = as_int(need(cfg, "steps", "$"), "$.steps");
    if (steps < 0) throw ConfigError("$.steps", "steps must be >= 0");
    if (!cfg.contains("burn_in")) cfg["burn_in"] = 0;
    const long long burn = as_int(cfg["burn_in"], "$.burn_in");
    if (burn < 0 || burn > steps)
        throw ConfigError("$.burn_in", "burn_in must lie in [0, steps]");
    if (!cfg.contains("record_every")) cfg["record_every"] = 1;
    if (as_int(cfg["record_every"], "$.record_every") < 1)
        throw ConfigError("$.record_every", "record_every must be >= 1");

    const ojson& seeds = need(cfg, "seeds", "$");
    if (!seeds.is_array() || seeds.empty())
        throw ConfigError("$.seeds", "expected a non-empty array of integers");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        as_int(seeds[i], "$.seeds[" + std::to_string(i) + "]");
    }

    if (!cfg.contains("initial")) cfg["initial"] = "random";
    if (!cfg.contains("out_dir")) cfg["out_dir"] = ".";
    as_string(cfg["out_dir"], "$.out_dir");

    if (verb == "verify-bounds") {
        if (mode != "oracle")
            throw ConfigError("$.mode", "verify-bounds requires oracle mode");
        if (!cfg.contains("verify")) cfg["verify"] = ojson::object();
        ojson& ver = cfg["verify"];
        if (!ver.contains("count")) ver["count"] = 5;
        if (as_int(ver["count"], "$.verify.count") < 2 && !ver.contains("temperatures"))
            throw ConfigError("$.verify.count", "need at least 2 grid points");
        if (ver.contains("temperatures")) {
            const ojson& ts = ver["temperatures"];
            if (!ts.is_array() || ts.empty())
                throw ConfigError("$.verify.temperatures", "expected a non-empty array");
            for (std::size_t i = 0; i < ts.size(); ++i) {
                if (as_double(ts[i], "$.verify.temperatures[" + std::to_string(i) + "]") <= 0.0)
                    throw ConfigError("$.verify.temperatures[" + std::to_string(i) + "]",
                                      "temperatures must be positive");
            }
        }
        if (!ver.contains("samples")) ver["samples"] = 200000;
        if (as_int(ver["samples"], "$.verify.samples") < 100)
            throw ConfigError("$.verify.samples", "need at least 100 chain steps");
        if (!ver.contains("thin")) ver["thin"] = 10;
        if (as_int(ver["thin"], "$.verify.thin") < 1)
            throw ConfigError("$.verify.thin", "thin must be >= 1");
        if (!ver.contains("mesh_points")) ver["mesh_points"] = 20;
        if (!ver.contains("tangents")) ver["tangents"] = 5;
        if (as_int(ver["mesh_points"], "$.verify.mesh_points") < 1 ||
            as_int(ver["tangents"], "$.verify.tangents") < 1)
            throw ConfigError("$.verify", "mesh_points and tangents must be >= 1");
    }

    if (verb == "compare") {
        if (!cfg.contains("compare")) cfg["compare"] = ojson::object();
        ojson& cmp = cfg["compare"];
        if (!cmp.contains("success_threshold")) cmp["success_threshold"] = 0.15;
        if (as_double(cmp["success_threshold"], "$.compare.success_threshold") <= 0.0)
            throw ConfigError("$.compare.success_threshold", "threshold must be positive");
        if (!cmp.contains("schedules")) {
            cmp["schedules"] = ojson::array(
                {ojson{{"kind", "geometric"}, {"t0", 1.0}, {"ratio", 0.995},
                       {"steps_per_level", 1}},
                 ojson{{"kind", "geometric"}, {"t0", 1.0}, {"ratio", 0.95},
                       {"steps_per_level", 10}},
                 ojson{{"kind", "logarithmic"}, {"c", 0.5}, {"offset", std::numbers::e}}});
        }
        const ojson& schedules = cmp["schedules"];
        if (!schedules.is_array() || schedules.empty())
            throw ConfigError("$.compare.schedules", "expected a non-empty array");
        for (std::size_t i = 0; i < schedules.size(); ++i) {
            const std::string path = "$.compare.schedules[" + std::to_string(i) + "]";
            const std::string kind = as_string(need(schedules[i], "kind", path), path + ".kind");
            if (kind == "geometric") {
                as_double(need(schedules[i], "t0", path), path + ".t0");
                as_double(need(schedules[i], "ratio", path), path + ".ratio");
                if (!cmp["schedules"][i].contains("steps_per_level"))
                    cmp["schedules"][i]["steps_per_level"] = 1;
            } else if (kind == "logarithmic") {
                as_double(need(schedules[i], "c", path), path + ".c");
                if (!cmp["schedules"][i].contains("offset"))
                    cmp["schedules"][i]["offset"] = std::numbers::e;
            } else {
                throw ConfigError(path + ".kind", "unknown schedule kind '" + kind + "'");
            }
        }
    }

    return cfg;
}

std::vector<std::uint64_t> seed_list(const ojson& cfg) {
    std::vector<std::uint64_t> seeds;
    for (const auto& s : cfg["seeds"]) seeds.push_back(s.get<std::uint64_t>());
    return seeds;
}

// ---------------------------------------------------------------------------
// manifold-specific plumbing: coordinates, objectives, kernels

std::vector<std::string> coord_names(const Sphere& m) {
    std::vector<std::string> names;
    for (int i = 1; i <= m.ambient_dim(); ++i) names.push_back("x" + std::to_string(i));
    return names;
}

std::vector<std::string> coord_names(const Grassmann& m) {
    std::vector<std::string> names;
    for (int i = 0; i < m.ambient_dim(); ++i) {
        for (int j = 0; j < m.ambient_dim(); ++j) {
            names.push_back("p_re_" + std::to_string(i) + "_" + std::to_string(j));
            names.push_back("p_im_" + std::to_string(i) + "_" + std::to_string(j));
        }
    }
    return names;
}

void append_point_fields(const Sphere&, const Sphere::Point& p, std::vector<std::string>& out) {
    for (int i = 0; i < p.coords.size(); ++i) out.push_back(fmt_double(p.coords[i]));
}

void append_point_fields(const Grassmann&, const Grassmann::Point& p,
                         std::vector<std::string>& out) {
    for (int i = 0; i < p.coords.rows(); ++i) {
        for (int j = 0; j < p.coords.cols(); ++j) {
            out.push_back(fmt_double(p.coords(i, j).real()));
            out.push_back(fmt_double(p.coords(i, j).imag()));
        }
    }
}

ojson point_to_json(const Sphere&, const Sphere::Point& p) {
    ojson arr = ojson::array();
    for (int i = 0; i < p.coords.size(); ++i) arr.push_back(p.coords[i]);
    return arr;
}

ojson point_to_json(const Grassmann&, const Grassmann::Point& p) {
    ojson rows = ojson::array();
    for (int i = 0; i < p.coords.rows(); ++i) {
        ojson row = ojson::array();
        for (int j = 0; j < p.coords.cols(); ++j) {
            row.push_back(ojson::array({p.coords(i, j).real(), p.coords(i, j).imag()}));
        }
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd parse_real_matrix(const ojson& j, int rows, int cols, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ConfigError(path, "expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const ojson& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError(path + "[" + std::to_string(i) + "]",
                              "expected " + std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c) {
            m(i, c) = as_double(row[c],
                                path + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
        }
    }
    return m;
}

// complex entries are plain numbers (real) or [re, im] pairs
Eigen::MatrixXcd parse_complex_matrix(const ojson& j, int rows, int cols,
                                      const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ConfigError(path, "expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const ojson& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError(path + "[" + std::to_string(i) + "]",
                              "expected " + std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c) {
            const ojson& e = row[c];
            const std::string epath =
                path + "[" + std::to_string(i) + "][" + std::to_string(c) + "]";
            if (e.is_number()) {
                m(i, c) = std::complex<double>(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2) {
                m(i, c) = std::complex<double>(as_double(e[0], epath + "[0]"),
                                               as_double(e[1], epath + "[1]"));
            } else {
                throw ConfigError(epath, "expected a number or an [re, im] pair");
            }
        }
    }
    return m;
}

Objective<Sphere> make_objective(const Sphere& m, const ojson& spec, const std::string& path) {
    const std::string kind = as_string(spec["kind"], path + ".kind");
    if (kind == "legendre9") {
        if (m.ambient_dim() < 3)
            throw ConfigError(path, "legendre9 reads the third coordinate; need ambient dim >= 3");
        return objective_legendre_sphere();
    }
    if (kind == "transported") {
        const ojson& base_spec = need(spec, "base", path);
        if (base_spec.is_object() &&
            as_string(need(base_spec, "kind", path + ".base"), path + ".base.kind") ==
                "transported")
            throw ConfigError(path + ".base", "transported objectives do not nest");
        const auto base = make_objective(m, base_spec, path + ".base");
        const Eigen::MatrixXd g = parse_real_matrix(need(spec, "rotation", path),
                                                    m.ambient_dim(), m.ambient_dim(),
                                                    path + ".rotation");
        return objective_transported(m, base, g);
    }
    throw ConfigError(path + ".kind", "objective '" + kind + "' is not defined on spheres");
}

Objective<Grassmann> make_objective(const Grassmann& m, const ojson& spec,
                                    const std::string& path) {
    const std::string kind = as_string(spec["kind"], path + ".kind");
    if (kind == "grassmann_trace") {
        const Eigen::MatrixXcd c = parse_complex_matrix(need(spec, "matrix", path),
                                                        m.ambient_dim(), m.ambient_dim(),
                                                        path + ".matrix");
        return objective_grassmann_trace(m, c);
    }
    if (kind == "transported") {
        const ojson& base_spec = need(spec, "base", path);
        if (base_spec.is_object() &&
            as_string(need(base_spec, "kind", path + ".base"), path + ".base.kind") ==
                "transported")
            throw ConfigError(path + ".base", "transported objectives do not nest");
        const auto base = make_objective(m, base_spec, path + ".base");
        const Eigen::MatrixXcd u = parse_complex_matrix(need(spec, "unitary", path),
                                                        m.ambient_dim(), m.ambient_dim(),
                                                        path + ".unitary");
        return objective_transported(m, base, u);
    }
    throw ConfigError(path + ".kind", "objective '" + kind + "' is not defined on grassmannians");
}

Sphere::Point parse_initial(const Sphere& m, const ojson& cfg, CounterRng& rng) {
    const ojson& init = cfg["initial"];
    if (init.is_string()) {
        if (init.get<std::string>() != "random")
            throw ConfigError("$.initial", "expected \"random\" or a coordinate array");
        return m.random_uniform_point(rng);
    }
    if (!init.is_array() || static_cast<int>(init.size()) != m.ambient_dim())
        throw ConfigError("$.initial",
                          "expected " + std::to_string(m.ambient_dim()) + " coordinates");
    Eigen::VectorXd v(m.ambient_dim());
    for (int i = 0; i < m.ambient_dim(); ++i)
        v[i] = as_double(init[i], "$.initial[" + std::to_string(i) + "]");
    const double norm = v.norm();
    if (norm < 1e-12) throw ConfigError("$.initial", "zero vector cannot be normalized");
    Sphere::Point p{v / norm};
    m.check_point(p);
    return p;
}

Grassmann::Point parse_initial(const Grassmann& m, const ojson& cfg, CounterRng& rng) {
    const ojson& init = cfg["initial"];
    if (init.is_string() && init.get<std::string>() == "random")
        return m.random_uniform_point(rng);
    throw ConfigError("$.initial", "grassmann runs support only \"random\" initial points");
}

// proposal kernels differ by manifold; a tiny adapter keeps verbs generic
struct SphereKernel {
    VmfProposal prop;
    Sphere::Point propose(const Sphere& m, CounterRng& rng, const Sphere::Point& x) const {
        return prop.propose(m, rng, x);
    }
};

struct GrassmannKernel {
    ConjugationProposal prop;
    Grassmann::Point propose(const Grassmann& m, CounterRng& rng,
                             const Grassmann::Point& x) const {
        return prop.propose(m, rng, x);
    }
};

SphereKernel make_kernel(const Sphere&, const ojson& cfg) {
    return SphereKernel{VmfProposal{cfg["kernel"]["kappa"].get<double>()}};
}

GrassmannKernel make_kernel(const Grassmann&, const ojson& cfg) {
    return GrassmannKernel{ConjugationProposal{cfg["kernel"]["step_scale"].get<double>()}};
}

// ---------------------------------------------------------------------------
// temperature resolution (oracle mode derives T, blind mode reads it)

template <Manifold M>
struct ResolvedTemperature {
    double temperature = 0.0;
    std::optional<TemperatureReport> report;
    std::optional<MinimizerProfile<M>> profile;
};

template <Manifold M>
ResolvedTemperature<M> resolve_temperature(const M& m, const Objective<M>& obj,
                                           const ojson& cfg) {
    ResolvedTemperature<M> out;
    if (cfg["mode"].get<std::string>() == "blind") {
        out.temperature = cfg["temperature"].get<double>();
        return out;
    }
    if (!obj.known_minimizer.has_value())
        throw ConfigError("$.mode", "oracle mode requires an objective with a known minimizer");
    ProfileOptions popt;
    const ojson& prof = cfg["profile"];
    popt.pad = prof["pad"].get<double>();
    popt.fd_step = prof["fd_step"].get<double>();
    popt.ball_samples = prof["ball_samples"].get<int>();
    popt.tail_samples = prof["tail_samples"].get<int>();
    popt.seed = prof["seed"].get<std::uint64_t>();
    out.profile = estimate_minimizer_profile(m, obj, *obj.known_minimizer, popt);
    std::optional<double> epsilon;
    if (!cfg["epsilon"].is_null()) epsilon = cfg["epsilon"].get<double>();
    out.report = make_temperature_report(m, *out.profile, cfg["delta"].get<double>(), epsilon);
    out.temperature = out.report->t_delta;
    return out;
}

ojson report_to_json(const TemperatureReport& r) {
    ojson j;
    j["t_o1"] = r.t_o1;
    j["t_o2"] = r.t_o2;
    j["t_o"] = r.t_o;
    j["t_o1_capped"] = r.t_o1_capped;
    j["t_o2_capped"] = r.t_o2_capped;
    j["t_delta1"] = r.t_delta1;
    j["t_delta2"] = r.t_delta2;
    j["t_delta"] = r.t_delta;
    j["epsilon"] = r.epsilon;
    j["delta"] = r.delta;
    j["threshold_o1"] = r.threshold_o1;
    j["threshold_o2"] = r.threshold_o2;
    j["threshold_delta2"] = r.threshold_delta2;
    j["mu_min"] = r.mu_min;
    j["mu_max"] = r.mu_max;
    j["rho"] = r.rho;
    j["u_rho"] = r.u_rho;
    j["u_delta"] = r.u_delta;
    j["dim"] = r.dim;
    j["diameter"] = r.diameter;
    j["volume"] = r.volume;
    j["r_cx"] = r.r_cx;
    j["injectivity_radius"] = r.injectivity_radius;
    j["kappa_sq"] = r.kappa_sq;
    j["a_m"] = r.a_m;
    j["b_n"] = r.b_n;
    j["omega_n"] = r.omega_n;
    j["c_n"] = r.c_n;
    j["d_n"] = r.d_n;
    return j;
}

// ---------------------------------------------------------------------------
// seed fan-out: per-seed tasks run on a small worker pool; results land in
// seed-indexed slots so aggregation order never depends on scheduling

void run_over_seeds(std::size_t n_tasks, int threads,
                    const std::function<void(std::size_t)>& task) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n_tasks)));
    std::vector<std::exception_ptr> errors(n_tasks);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// trajectory CSV: one row per recorded step, constant seed column, and the
// resolved config embedded (RFC 4180 quoted) in the first data row only
template <Manifold M>
class TrajectoryCsv {
  public:
    TrajectoryCsv(const M& m, std::vector<std::string> extra_columns, std::uint64_t seed,
                  std::string config_dump)
        : seed_(std::to_string(seed)), config_dump_(std::move(config_dump)) {
        std::vector<std::string> header = {"n"};
        const auto coords = coord_names(m);
        header.insert(header.end(), coords.begin(), coords.end());
        header.push_back("dist_to_minimizer");
        header.push_back("u");
        header.insert(header.end(), extra_columns.begin(), extra_columns.end());
        header.push_back("seed");
        header.push_back("config");
        writer_.emplace(header);
    }

    void append(const M& m, long long n, const typename M::Point& p,
                const std::optional<typename M::Point>& minimizer, double u,
                const std::vector<std::string>& extra) {
        std::vector<std::string> row = {std::to_string(n)};
        append_point_fields(m, p, row);
        row.push_back(minimizer ? fmt_double(m.distance(p, *minimizer)) : "");
        row.push_back(fmt_double(u));
        row.insert(row.end(), extra.begin(), extra.end());
        row.push_back(seed_);
        row.push_back(first_row_ ? config_dump_ : "");
        first_row_ = false;
        writer_->append_row(row);
    }

    const std::string& str() const { return writer_->str(); }

  private:
    std::string seed_;
    std::string config_dump_;
    bool first_row_ = true;
    std::optional<CsvWriter> writer_;
};

// cross-section of the objective along a meridian, parametrized by x3
void write_objective_profile(const Sphere& m, const Objective<Sphere>& obj, const fs::path& dir,
                             const std::string& config_dump) {
    CsvWriter csv({"x3", "u", "config"});
    const int points = 1001;
    for (int i = 0; i < points; ++i) {
        const double t = -1.0 + 2.0 * static_cast<double>(i) / (points - 1);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(m.ambient_dim());
        v[0] = std::sqrt(std::max(0.0, 1.0 - t * t));
        v[2] = t;
        csv.append_row({fmt_double(t), fmt_double(obj.eval(Sphere::Point{v})),
                        i == 0 ? config_dump : ""});
    }
    write_text_atomic(dir / "objective_profile.csv", csv.str());
}

// ---------------------------------------------------------------------------
// verbs

template <Manifold M>
int cmd_temperatures(const M& m, const ojson& cfg, const fs::path& out_dir) {
    if (cfg["mode"].get<std::string>() != "oracle")
        throw ConfigError("$.mode", "temperatures requires oracle mode");
    const auto obj = make_objective(m, cfg["objective"], "$.objective");
    const auto resolved = resolve_temperature(m, obj, cfg);
    ojson out;
    out["verb"] = "temperatures";
    out["config"] = cfg;
    out["report"] = report_to_json(*resolved.report);
    out["hessian_eigenvalues"] = resolved.profile->hessian_eigenvalues;
    write_json_atomic(out_dir / "temperature_report.json", out);
    return 0;
}

template <Manifold M>
int cmd_optimize(const M& m, const ojson& cfg, const fs::path& out_dir, int threads) {
    const auto obj = make_objective(m, cfg["objective"], "$.objective");
    const auto resolved = resolve_temperature(m, obj, cfg);
    const auto seeds = seed_list(cfg);
    const std::string config_dump = cfg.dump();
    const long long steps = cfg["steps"].get<long long>();
    const long long burn_in = cfg["burn_in"].get<long long>();
    const long long record_every = cfg["record_every"].get<long long>();
    const auto kernel = make_kernel(m, cfg);

    struct RunResult {
        std::uint64_t seed = 0;
        typename M::Point x_hat;
        double u_final = 0.0;
        std::optional<double> distance;
        double acceptance_rate = 0.0;
        double runtime_seconds = 0.0;
        std::string csv_name;
    };
    std::vector<RunResult> results(seeds.size());

    run_over_seeds(seeds.size(), threads, [&](std::size_t i) {
        const std::uint64_t seed = seeds[i];
        const auto start_time = std::chrono::steady_clock::now();
        CounterRng rng(seed, 0);
        const auto x0 = parse_initial(m, cfg, rng);

        TrajectoryCsv<M> csv(m, {}, seed, config_dump);
        csv.append(m, 0, x0, obj.known_minimizer, obj.eval(x0), {});

        BarycentreTracker<M> tracker(m);
        typename M::Point x_hat = x0;
        long long recorded_n = 0;
        ChainOptions opt;
        opt.temperature = resolved.temperature;
        opt.n_steps = steps;
        opt.burn_in = burn_in;
        const auto chain = run_chain(
            m, obj, kernel, x0, opt, rng,
            [&](long long, const typename M::Point& z, double, bool) {
                tracker.update(z);
                x_hat = tracker.current();
                ++recorded_n;
                if (recorded_n % record_every == 0 || recorded_n == steps - burn_in) {
                    csv.append(m, recorded_n, x_hat, obj.known_minimizer, obj.eval(x_hat), {});
                }
            });

        const std::string name = "trajectory_seed" + std::to_string(seed) + ".csv";
        write_text_atomic(out_dir / name, csv.str());

        RunResult& r = results[i];
        r.seed = seed;
        r.x_hat = x_hat;
        r.u_final = obj.eval(x_hat);
        if (obj.known_minimizer) r.distance = m.distance(x_hat, *obj.known_minimizer);
        r.acceptance_rate = chain.acceptance_rate;
        r.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
        r.csv_name = name;
    });

    if constexpr (std::is_same_v<M, Sphere>) {
        if (m.ambient_dim() >= 3) write_objective_profile(m, obj, out_dir, config_dump);
    }

    ojson out;
    out["verb"] = "optimize";
    out["config"] = cfg;
    out["temperature"] = resolved.temperature;
    if (resolved.report) out["temperature_report"] = report_to_json(*resolved.report);
    ojson runs = ojson::array();
    std::vector<double> distances;
    for (const auto& r : results) {
        ojson run;
        run["seed"] = r.seed;
        run["trajectory_csv"] = r.csv_name;
        run["x_hat"] = point_to_json(m, r.x_hat);
        run["u_final"] = r.u_final;
        if (r.distance) {
            run["distance_to_minimizer"] = *r.distance;
            distances.push_back(*r.distance);
        } else {
            run["distance_to_minimizer"] = nullptr;
        }
        run["acceptance_rate"] = r.acceptance_rate;
        run["runtime_seconds"] = r.runtime_seconds;
        runs.push_back(run);
    }
    out["runs"] = runs;
    if (!distances.empty()) out["median_final_distance"] = median(distances);
    write_json_atomic(out_dir / "summary.json", out);
    return 0;
}

template <Manifold M>
FunctionalEstimate hessian_estimate(const M& m, const std::vector<typename M::Point>& samples,
                                    const typename M::Point& x, const typename M::Tangent& u) {
    if constexpr (std::is_same_v<M, Sphere>) {
        return estimate_hessian_form(m, samples, x, u);
    } else {
        return hessian_form_fd(m, samples, x, u, 1e-3);
    }
}

template <Manifold M>
int cmd_verify_bounds(const M& m, const ojson& cfg, const fs::path& out_dir, int threads) {
    const auto obj = make_objective(m, cfg["objective"], "$.objective");
    const auto resolved = resolve_temperature(m, obj, cfg);
    const auto& report = *resolved.report;
    const auto& profile = *resolved.profile;
    const auto& x_star = profile.x_star;
    const ojson& ver = cfg["verify"];
    const std::string config_dump = cfg.dump();
    const auto seeds = seed_list(cfg);
    const std::uint64_t seed = seeds.front();

    std::vector<double> grid;
    if (ver.contains("temperatures")) {
        for (const auto& t : ver["temperatures"]) grid.push_back(t.get<double>());
    } else {
        // geometric grid over (T_o/16, T_o]
        const int count = ver["count"].get<int>();
        const double hi = report.t_o;
        const double lo = hi / 16.0;
        for (int i = 0; i < count; ++i) {
            grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
        }
    }
    std::sort(grid.begin(), grid.end());

    const long long n_steps = ver["samples"].get<long long>();
    const long long thin = ver["thin"].get<long long>();
    const int mesh_points = ver["mesh_points"].get<int>();
    const int tangents = ver["tangents"].get<int>();
    const double delta = cfg["delta"].get<double>();
    const auto constants = make_constants_table(m);

    struct Row {
        double temperature = 0.0;
        double kernel_param = 0.0;
        long long n_samples = 0;
        double wasserstein = 0.0, wasserstein_se = 0.0, eq3_rhs = 0.0;
        bool t_le_t_o = false, eq3_pass = false;
        double hessian_min = 0.0, hessian_min_se = 0.0, eq7_rhs = 0.0;
        bool eq7_pass = false;
    };
    std::vector<Row> rows(grid.size());

    run_over_seeds(grid.size(), threads, [&](std::size_t gi) {
        const double t = grid[gi];
        // at low T the Gibbs measure concentrates at scale sqrt(T/mu); widen
        // the proposal concentration to match so the chain keeps mixing
        double kernel_param = 0.0;
        CounterRng rng(seed, gi);
        std::vector<typename M::Point> samples;
        ChainOptions opt;
        opt.temperature = t;
        opt.n_steps = n_steps;
        opt.burn_in = n_steps / 10;
        auto collect = [&](long long step, const typename M::Point& z, double, bool) {
            if ((step - opt.burn_in) % thin == 0) samples.push_back(z);
        };
        if constexpr (std::is_same_v<M, Sphere>) {
            const double kappa = std::max(cfg["kernel"]["kappa"].get<double>(),
                                          profile.mu_max / t);
            kernel_param = kappa;
            run_chain(m, obj, SphereKernel{VmfProposal{kappa}}, x_star, opt, rng, collect);
        } else {
            kernel_param = cfg["kernel"]["step_scale"].get<double>();
            run_chain(m, obj, GrassmannKernel{ConjugationProposal{kernel_param}}, x_star, opt,
                      rng, collect);
        }

        Row& row = rows[gi];
        row.temperature = t;
        row.kernel_param = kernel_param;
        row.n_samples = static_cast<long long>(samples.size());

        const auto w = wasserstein_to_dirac(m, samples, x_star);
        row.wasserstein = w.value;
        row.wasserstein_se = w.std_error;
        row.eq3_rhs = wasserstein_bound(t, m.dim(), constants.b_n, profile.mu_min,
                                        profile.mu_max);
        row.t_le_t_o = t <= report.t_o;
        row.eq3_pass = w.value <= row.eq3_rhs + 3.0 * w.std_error;

        // minimum Hessian-form estimate over a ball mesh vs the convexity RHS
        const double f_tail = f_gibbs_tail(t, delta, profile, m);
        row.eq7_rhs = ct_convexity(delta, std::sqrt(m.kappa_sq())) *
                          (1.0 - m.volume() * f_tail) -
                      std::numbers::pi * report.a_m * f_tail;
        CounterRng mesh_rng(seed, 1000 + gi);
        bool all_pass = true;
        double min_est = std::numeric_limits<double>::infinity();
        double min_se = 0.0;
        for (int p = 0; p < mesh_points; ++p) {
            const double radius = delta * uniform_open(mesh_rng);
            const auto dir = m.random_unit_tangent(mesh_rng, x_star);
            const auto x = m.exp_map(x_star, m.scale_tangent(dir, radius));
            for (int q = 0; q < tangents; ++q) {
                const auto u = m.random_unit_tangent(mesh_rng, x);
                const auto h = hessian_estimate(m, samples, x, u);
                if (h.value < row.eq7_rhs - 3.0 * h.std_error) all_pass = false;
                if (h.value < min_est) {
                    min_est = h.value;
                    min_se = h.std_error;
                }
            }
        }
        row.hessian_min = min_est;
        row.hessian_min_se = min_se;
        row.eq7_pass = all_pass;
    });

    CsvWriter csv({"temperature", "kernel_param", "n_samples", "wasserstein", "wasserstein_se",
                   "eq3_rhs", "t_le_t_o", "eq3_pass", "hessian_min", "hessian_min_se", "eq7_rhs",
                   "eq7_pass", "seed", "config"});
    bool first = true;
    for (const auto& r : rows) {
        csv.append_row({fmt_double(r.temperature), fmt_double(r.kernel_param),
                        std::to_string(r.n_samples), fmt_double(r.wasserstein),
                        fmt_double(r.wasserstein_se), fmt_double(r.eq3_rhs),
                        r.t_le_t_o ? "true" : "false", r.eq3_pass ? "true" : "false",
                        fmt_double(r.hessian_min), fmt_double(r.hessian_min_se),
                        fmt_double(r.eq7_rhs), r.eq7_pass ? "true" : "false",
                        std::to_string(seed), first ? config_dump : ""});
        first = false;
    }
    write_text_atomic(out_dir / "bounds_table.csv", csv.str());

    // log-log regression of the Wasserstein estimate against T: the expected
    // square-root law shows up as a slope near 1/2
    double slope = 0.0;
    if (rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& r : rows) {
            const double lx = std::log(r.temperature);
            const double ly = std::log(r.wasserstein);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double n = static_cast<double>(rows.size());
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    ojson out;
    out["verb"] = "verify-bounds";
    out["config"] = cfg;
    out["seed"] = seed;
    out["report"] = report_to_json(report);
    ojson jrows = ojson::array();
    bool all3 = true, all7 = true;
    for (const auto& r : rows) {
        ojson jr;
        jr["temperature"] = r.temperature;
        jr["kernel_param"] = r.kernel_param;
        jr["n_samples"] = r.n_samples;
        jr["wasserstein"] = r.wasserstein;
        jr["wasserstein_se"] = r.wasserstein_se;
        jr["eq3_rhs"] = r.eq3_rhs;
        jr["t_le_t_o"] = r.t_le_t_o;
        jr["eq3_pass"] = r.eq3_pass;
        jr["hessian_min"] = r.hessian_min;
        jr["hessian_min_se"] = r.hessian_min_se;
        jr["eq7_rhs"] = r.eq7_rhs;
        jr["eq7_pass"] = r.eq7_pass;
        jrows.push_back(jr);
        if (r.t_le_t_o && !r.eq3_pass) all3 = false;
        if (!r.eq7_pass) all7 = false;
    }
    out["rows"] = jrows;
    out["wasserstein_slope"] = slope;
    out["all_eq3_pass"] = all3;
    out["all_eq7_pass"] = all7;
    write_json_atomic(out_dir / "bounds_summary.json", out);
    return 0;
}

struct ScheduleRunner {
    // type-erased per-step temperature so both schedule families share a path
    std::function<double(long long)> temperature;
    std::string label;
};

ScheduleRunner make_schedule(const ojson& spec, std::size_t index) {
    const std::string kind = spec["kind"].get<std::string>();
    if (kind == "geometric") {
        const GeometricSchedule s(spec["t0"].get<double>(), spec["ratio"].get<double>(),
                                  spec["steps_per_level"].get<long long>());
        return {[s](long long n) { return s(n); }, "geometric_" + std::to_string(index)};
    }
    const LogarithmicSchedule s(spec["c"].get<double>(), spec["offset"].get<double>());
    return {[s](long long n) { return s(n); }, "logarithmic_" + std::to_string(index)};
}

template <Manifold M>
int cmd_compare(const M& m, const ojson& cfg, const fs::path& out_dir, int threads) {
    const auto obj = make_objective(m, cfg["objective"], "$.objective");
    if (!obj.known_minimizer.has_value())
        throw ConfigError("$.objective", "compare needs a known minimizer to score runs");
    const auto resolved = resolve_temperature(m, obj, cfg);
    const auto seeds = seed_list(cfg);
    const std::string config_dump = cfg.dump();
    const long long steps = cfg["steps"].get<long long>();
    const long long burn_in = cfg["burn_in"].get<long long>();
    const long long record_every = cfg["record_every"].get<long long>();
    const double threshold = cfg["compare"]["success_threshold"].get<double>();
    const auto kernel = make_kernel(m, cfg);
    const auto& x_star = *obj.known_minimizer;

    std::vector<ScheduleRunner> schedules;
    for (std::size_t i = 0; i < cfg["compare"]["schedules"].size(); ++i) {
        schedules.push_back(make_schedule(cfg["compare"]["schedules"][i], i));
    }

    struct SeedOutcome {
        double barycentre_distance = 0.0;
        double barycentre_u = 0.0;
        std::string barycentre_csv;
        std::vector<double> annealing_best_distance;
        std::vector<double> annealing_final_distance;
        std::vector<double> annealing_best_u;
        std::vector<std::string> annealing_csv;
    };
    std::vector<SeedOutcome> outcomes(seeds.size());

    run_over_seeds(seeds.size(), threads, [&](std::size_t i) {
        const std::uint64_t seed = seeds[i];
        SeedOutcome& o = outcomes[i];

        // barycentre tracking run (stream 0)
        {
            CounterRng rng(seed, 0);
            const auto x0 = parse_initial(m, cfg, rng);
            TrajectoryCsv<M> csv(m, {}, seed, config_dump);
            csv.append(m, 0, x0, obj.known_minimizer, obj.eval(x0), {});
            BarycentreTracker<M> tracker(m);
            typename M::Point x_hat = x0;
            long long n = 0;
            ChainOptions opt;
            opt.temperature = resolved.temperature;
            opt.n_steps = steps;
            opt.burn_in = burn_in;
            run_chain(m, obj, kernel, x0, opt, rng,
                      [&](long long, const typename M::Point& z, double, bool) {
                          tracker.update(z);
                          x_hat = tracker.current();
                          ++n;
                          if (n % record_every == 0 || n == steps - burn_in) {
                              csv.append(m, n, x_hat, obj.known_minimizer, obj.eval(x_hat), {});
                          }
                      });
            o.barycentre_csv = "barycentre_seed" + std::to_string(seed) + ".csv";
            write_text_atomic(out_dir / o.barycentre_csv, csv.str());
            o.barycentre_distance = m.distance(x_hat, x_star);
            o.barycentre_u = obj.eval(x_hat);
        }

        // annealing runs (stream 1 + schedule index)
        for (std::size_t s = 0; s < schedules.size(); ++s) {
            CounterRng rng(seed, 1 + s);
            const auto x0 = parse_initial(m, cfg, rng);
            TrajectoryCsv<M> csv(m, {"temperature", "best_u"}, seed, config_dump);
            csv.append(m, 0, x0, obj.known_minimizer, obj.eval(x0),
                       {fmt_double(schedules[s].temperature(0)), fmt_double(obj.eval(x0))});
            long long n = 0;
            const auto res = run_annealing(
                m, obj, kernel, x0, schedules[s].temperature, steps, rng,
                [&](long long step, double t, const typename M::Point& z, double u, bool,
                    double best_u) {
                    ++n;
                    if (n % record_every == 0 || n == steps) {
                        csv.append(m, n, z, obj.known_minimizer, u,
                                   {fmt_double(t), fmt_double(best_u)});
                    }
                    (void)step;
                });
            const std::string name = "annealing_" + schedules[s].label + "_seed" +
                                     std::to_string(seed) + ".csv";
            write_text_atomic(out_dir / name, csv.str());
            o.annealing_csv.push_back(name);
            o.annealing_best_distance.push_back(m.distance(res.best_point, x_star));
            o.annealing_final_distance.push_back(m.distance(res.final_point, x_star));
            o.annealing_best_u.push_back(res.best_u);
        }
    });

    ojson out;
    out["verb"] = "compare";
    out["config"] = cfg;
    out["temperature"] = resolved.temperature;
    if (resolved.report) out["temperature_report"] = report_to_json(*resolved.report);
    out["success_threshold"] = threshold;

    ojson bary;
    {
        ojson runs = ojson::array();
        std::vector<double> dist;
        int successes = 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const auto& o = outcomes[i];
            runs.push_back(ojson{{"seed", seeds[i]},
                                 {"distance", o.barycentre_distance},
                                 {"u_final", o.barycentre_u},
                                 {"trajectory_csv", o.barycentre_csv}});
            dist.push_back(o.barycentre_distance);
            if (o.barycentre_distance < threshold) ++successes;
        }
        bary["success_rate"] = static_cast<double>(successes) / static_cast<double>(seeds.size());
        bary["median_final_distance"] = median(dist);
        bary["runs"] = runs;
    }
    out["barycentre"] = bary;

    ojson ann = ojson::array();
    for (std::size_t s = 0; s < schedules.size(); ++s) {
        ojson entry;
        entry["schedule"] = cfg["compare"]["schedules"][s];
        entry["label"] = schedules[s].label;
        ojson runs = ojson::array();
        std::vector<double> best;
        int successes = 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const auto& o = outcomes[i];
            runs.push_back(ojson{{"seed", seeds[i]},
                                 {"best_distance", o.annealing_best_distance[s]},
                                 {"final_distance", o.annealing_final_distance[s]},
                                 {"best_u", o.annealing_best_u[s]},
                                 {"trajectory_csv", o.annealing_csv[s]}});
            best.push_back(o.annealing_best_distance[s]);
            if (o.annealing_best_distance[s] < threshold) ++successes;
        }
        entry["success_rate"] =
            static_cast<double>(successes) / static_cast<double>(seeds.size());
        entry["median_best_distance"] = median(best);
        entry["runs"] = runs;
        ann.push_back(entry);
    }
    out["annealing"] = ann;
    write_json_atomic(out_dir / "comparison.json", out);
    return 0;
}

// ---------------------------------------------------------------------------
// dispatch

int run_verb(const std::string& verb, ojson cfg, const std::string& out_override,
             std::optional<std::uint64_t> seed_override, int threads) {
    cfg = normalize_config(std::move(cfg), verb);
    if (seed_override) cfg["seeds"] = ojson::array({*seed_override});
    if (!out_override.empty()) cfg["out_dir"] = out_override;
    const fs::path out_dir = cfg["out_dir"].get<std::string>();
    fs::create_directories(out_dir);

    const std::string mtype = cfg["manifold"]["type"].get<std::string>();
    auto dispatch = [&](const auto& m) -> int {
        if (verb == "optimize") return cmd_optimize(m, cfg, out_dir, threads);
        if (verb == "temperatures") return cmd_temperatures(m, cfg, out_dir);
        if (verb == "verify-bounds") return cmd_verify_bounds(m, cfg, out_dir, threads);
        return cmd_compare(m, cfg, out_dir, threads);
    };
    if (mtype == "sphere") {
        return dispatch(Sphere(cfg["manifold"]["n"].get<int>()));
    }
    return dispatch(
        Grassmann(cfg["manifold"]["k"].get<int>(), cfg["manifold"]["n"].get<int>()));
}

void print_error_json(const std::string& verb, const std::exception& e) {
    ojson err;
    err["error"]["verb"] = verb;
    err["error"]["message"] = e.what();
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
        err["error"]["config_path"] = ce->json_path;
    }
    std::printf("%s\n", err.dump(2).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"barycentre-based global optimization on symmetric spaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::optional<std::uint64_t> seed_override;
    int threads = 0;

    const std::vector<std::pair<std::string, std::string>> verbs = {
        {"optimize", "run the barycentre tracker and write trajectories + summary"},
        {"temperatures", "estimate the objective profile and both temperature thresholds"},
        {"verify-bounds", "check the concentration bounds on a temperature grid"},
        {"compare", "benchmark the tracker against simulated-annealing schedules"}};
    for (const auto& [verb, blurb] : verbs) {
        auto* sub = app.add_subcommand(verb, blurb);
        sub->add_option("--config", config_path, "configuration file (JSON)")->required();
        sub->add_option("--seed-override", seed_override,
                        "replace the configured seed list with this single seed");
        sub->add_option("--out", out_override, "output directory (overrides config)");
        sub->add_option("--threads", threads, "worker threads for seed fan-out");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    if (threads <= 0) {
        if (const char* env = std::getenv("BARYOPT_THREADS")) threads = std::atoi(env);
    }
    if (threads <= 0) threads = 1;

    try {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config file '" + config_path + "'");
        ojson cfg;
        try {
            cfg = ojson::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("$", std::string("invalid JSON: ") + e.what());
        }
        return run_verb(verb, std::move(cfg), out_override, seed_override, threads);
    } catch (const std::exception& e) {
        print_error_json(verb, e);
        return 1;
    }
}
