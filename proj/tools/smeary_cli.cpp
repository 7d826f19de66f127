#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smeary/cli_io.hpp"
#include "smeary/critical_angles.hpp"
#include "smeary/estimator.hpp"
#include "smeary/profile.hpp"
#include "smeary/shapes.hpp"
#include "smeary/smeariness.hpp"

using json = nlohmann::ordered_json;
using namespace smeary;

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kConvergence = 3, kConsistency = 4 };

/// Reads a JSON object as CLI11 config items; nested objects become dotted names.
class ConfigJSON : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (!opt->get_lnames().empty() && opt->get_configurable()) {
                const std::string name = opt->get_lnames()[0];
                if (opt->count() > 0) {
                    j[name] = opt->results().size() == 1 ? json(opt->results()[0]) : json(opt->results());
                } else if (default_also && !opt->get_default_str().empty()) {
                    j[name] = opt->get_default_str();
                }
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw CLI::ConfigError(std::string("invalid JSON config: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        flatten(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_boolean()) {
            return v.get<bool>() ? "true" : "false";
        }
        return v.dump();
    }

    static void flatten(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it->is_object()) {
                auto p = parents;
                p.push_back(it.key());
                flatten(*it, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (it->is_array()) {
                for (const auto& v : *it) {
                    item.inputs.push_back(scalar(v));
                }
            } else {
                item.inputs.push_back(scalar(*it));
            }
            out.push_back(std::move(item));
        }
    }
};

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Replaces `--config FILE` by the options it lists. Keys are long option
/// names; options also given on the command line keep the command-line value.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    auto it = std::find(args.begin(), args.end(), std::string("--config"));
    if (it == args.end()) {
        return args;
    }
    if (it + 1 == args.end()) {
        throw std::invalid_argument("--config needs a file name");
    }
    const std::string path = *(it + 1);
    it = args.erase(it, it + 2);
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file " + path);
    }
    std::vector<CLI::ConfigItem> items;
    try {
        items = ends_with(path, ".json") ? ConfigJSON().from_config(in) : CLI::ConfigTOML().from_config(in);
    } catch (const CLI::ConfigError& e) {
        throw std::invalid_argument(e.what());
    }
    std::vector<std::string> extra;
    for (const auto& item : items) {
        if (!item.parents.empty() || item.name.empty() || item.name == "++" || item.name == "--") {
            continue;
        }
        const std::string flag = "--" + item.name;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (given) {
            continue;
        }
        if (item.inputs.size() == 1) {
            extra.push_back(flag + "=" + item.inputs[0]);
        } else {
            extra.push_back(flag);
            extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
        }
    }
    args.insert(it, extra.begin(), extra.end());
    return args;
}

/// Integer grid from "a,b,c" or "lo:hi[:count]" (log-spaced, rounded, deduplicated).
std::vector<long long> parse_size_grid(const std::string& text) {
    std::vector<long long> out;
    auto to_ll = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos != s.size()) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (const std::exception&) {
            throw InvalidInput("grid '" + text + "': '" + s + "' is not an integer");
        }
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ':')) {
            parts.push_back(p);
        }
        if (parts.size() < 2 || parts.size() > 3) {
            throw InvalidInput("grid '" + text + "': expected lo:hi or lo:hi:count");
        }
        const long long lo = to_ll(parts[0]);
        const long long hi = to_ll(parts[1]);
        const long long count = parts.size() == 3 ? to_ll(parts[2]) : 20;
        if (lo < 1 || hi < lo || count < 1) {
            throw InvalidInput("grid '" + text + "': need 1 <= lo <= hi and count >= 1");
        }
        if (count == 1 || lo == hi) {
            return {lo};
        }
        const double a = std::log(static_cast<double>(lo));
        const double b = std::log(static_cast<double>(hi));
        for (long long i = 0; i < count; ++i) {
            const long long v = std::llround(std::exp(a + (b - a) * static_cast<double>(i) / (count - 1)));
            if (out.empty() || v > out.back()) {
                out.push_back(v);
            }
        }
        out.back() = hi;
        return out;
    }
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ',')) {
        out.push_back(to_ll(p));
    }
    if (out.empty()) {
        throw InvalidInput("grid '" + text + "' is empty");
    }
    return out;
}

std::pair<int, int> parse_int_range(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const int v = std::stoi(text);
            return {v, v};
        }
        return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw InvalidInput("range '" + text + "': expected lo:hi");
    }
}

/// Opens the CSV target (stdout when the path is empty or "-").
class Output {
public:
    explicit Output(const std::string& path) : path_(path) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw InvalidInput("cannot write " + path);
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

    /// Writes the JSON sidecar next to the CSV, or to stderr for stdout output.
    void sidecar(const json& meta) const {
        if (path_.empty() || path_ == "-") {
            std::cerr << meta.dump(2) << '\n';
            return;
        }
        std::string side = path_;
        if (ends_with(side, ".csv")) {
            side.resize(side.size() - 4);
        }
        side += ".json";
        std::ofstream out(side, std::ios::binary);
        if (!out) {
            throw InvalidInput("cannot write " + side);
        }
        out << meta.dump(2) << '\n';
    }

private:
    std::string path_;
    std::ofstream file_;
};

json base_meta(const std::string& command) {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    return j;
}

json slope_json(const SlopeFit& fit) {
    json j;
    j["slope"] = fit.slope;
    j["stderr"] = fit.stderr_;
    j["intercept"] = fit.intercept;
    return j;
}

struct ModelArgs {
    std::string model = "hole";
    int m = 5;
    std::string alpha = "auto";
    double beta = 0.2;
    double delta = 0.5;
    std::optional<double> theta_star;

    void add_to(CLI::App* app) {
        app->add_option("--model", model, "hole | hemisphere | cap | ring")
            ->check(CLI::IsMember({"hole", "hemisphere", "cap", "ring"}));
        app->add_option("--m", m, "sphere dimension")->check(CLI::Range(1, 100000));
        app->add_option("--alpha", alpha, "weight of the off-pole part, or 'auto'");
        app->add_option("--beta", beta, "hole radius (rad), hole model");
        app->add_option("--delta", delta, "cap radius (rad), cap model");
        app->add_option("--theta-star", theta_star, "ring polar angle (rad); default theta_m4 + 0.05");
    }

    double ring_theta() const { return theta_star ? *theta_star : theta_m4(m) + 0.05; }

    /// auto: flat-Hessian weight for hole/hemisphere/ring, sin(delta)/(4 pi) for the cap.
    double auto_alpha() const {
        if (model == "hole") {
            return alpha_for_flat_hessian(beta, m);
        }
        if (model == "hemisphere") {
            return alpha_for_flat_hessian(0.0, m);
        }
        if (model == "ring") {
            return ring_alpha0(m, ring_theta());
        }
        return std::sin(delta) / (4.0 * std::numbers::pi);
    }

    double resolved_alpha() const {
        if (alpha == "auto") {
            return auto_alpha();
        }
        try {
            std::size_t pos = 0;
            const double a = std::stod(alpha, &pos);
            if (pos != alpha.size()) {
                throw std::invalid_argument(alpha);
            }
            return a;
        } catch (const std::exception&) {
            throw InvalidInput("--alpha must be a number or 'auto'");
        }
    }

    RadialMixture build() const {
        const double a = resolved_alpha();
        if (model == "hole") {
            return hole_model(m, a, beta);
        }
        if (model == "hemisphere") {
            return hemisphere_model(m, a);
        }
        if (model == "cap") {
            return cap_model(m, a, delta);
        }
        return ring_model(m, a, ring_theta());
    }

    json to_json() const {
        json j;
        j["model"] = model;
        j["m"] = m;
        j["alpha"] = resolved_alpha();
        j["alpha_spec"] = alpha;
        if (model == "hole") {
            j["beta"] = beta;
        } else if (model == "cap") {
            j["delta"] = delta;
        } else if (model == "ring") {
            j["theta_star"] = ring_theta();
        }
        return j;
    }
};

struct McArgs {
    int replicates = 300;
    std::uint64_t seed = 1;
    std::string center = "replicate-mean";
    bool local_cap = false;
    double cap_radius = std::numbers::pi / 2;
    int threads = default_thread_count();

    void add_to(CLI::App* app, int default_b) {
        replicates = default_b;
        app->add_option("--B", replicates, "replicates per size")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "base seed");
        app->add_option("--center", center, "variance center: replicate-mean | pole")
            ->check(CLI::IsMember({"replicate-mean", "pole"}));
        app->add_flag("--local-cap", local_cap, "restrict the mean search to a cap about the pole");
        app->add_option("--cap-radius", cap_radius, "radius of the search cap (rad)");
        app->add_option("--threads", threads, "worker threads (default from SMEARY_THREADS)")
            ->check(CLI::PositiveNumber);
    }

    ExperimentOptions options(int dim) const {
        ExperimentOptions o;
        o.center = center == "pole" ? VarianceCenter::KnownPole : VarianceCenter::ReplicateMean;
        o.threads = threads;
        if (local_cap) {
            o.mean.cap = SearchCap{UnitVector::north_pole(dim), cap_radius};
        }
        return o;
    }

    json to_json() const {
        json j;
        j["B"] = replicates;
        j["seed"] = seed;
        j["center"] = center;
        j["local_cap"] = local_cap;
        if (local_cap) {
            j["cap_radius"] = cap_radius;
        }
        return j;
    }
};

json curve_meta(const ScalingCurve& curve) {
    json j;
    j["slope_fit"] = slope_json(curve.slope_fit);
    int failures = 0;
    for (int f : curve.failures) {
        failures += f;
    }
    j["n_failures_total"] = failures;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frechet means on spheres: smeariness diagnostics and experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "validation: " << e.what() << "\n";
        return kValidation;
    }
    std::vector<char*> expanded;
    for (auto& a : args) {
        expanded.push_back(a.data());
    }

    std::string out_path;
    std::string config_path;  // consumed by expand_config; declared for --help
    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "CSV output path ('-' = stdout)");
        sub->add_option("--config", config_path, "TOML or JSON file; keys are long option names");
    };

    // critical-angles
    auto* ca = app.add_subcommand("critical-angles", "theta_m2, theta_m4, beta_m2, beta_m4 with bound checks");
    std::string m_range = "2:100";
    ca->add_option("--m-range", m_range, "dimension range lo:hi");
    add_out(ca);

    // profile
    auto* pr = app.add_subcommand("profile", "F and its psi-derivatives on a grid");
    ModelArgs pr_model;
    pr_model.add_to(pr);
    double psi_max = std::numbers::pi;
    int psi_points = 101;
    bool restricted = false;
    bool quadrature_only = false;
    pr->add_option("--psi-max", psi_max, "upper end of the psi grid (rad)");
    pr->add_option("--points", psi_points, "grid points including psi = 0")->check(CLI::Range(2, 100000));
    pr->add_flag("--allow-restricted", restricted, "admit derivative orders valid only away from the cut locus");
    pr->add_flag("--quadrature-only", quadrature_only, "skip closed forms at the pole");
    add_out(pr);

    // verify-cap
    auto* th = app.add_subcommand("verify-cap", "cap construction with a positive Hessian and a unique mean");
    std::vector<double> deltas{0.1, 0.3, 1.0, std::numbers::pi / 2};
    std::vector<int> th_dims{2, 5};
    int th_points = 100;
    th->add_option("--delta", deltas, "cap radii (rad)");
    th->add_option("--m", th_dims, "dimensions");
    th->add_option("--points", th_points, "psi grid points on (0, pi]")->check(CLI::Range(1, 100000));
    add_out(th);

    // variance-scaling
    auto* vs = app.add_subcommand("variance-scaling", "n Var of sample means over a size grid");
    ModelArgs vs_model;
    vs_model.add_to(vs);
    McArgs vs_mc;
    vs_mc.add_to(vs, 300);
    std::string vs_grid = "100:10000:5";
    vs->add_option("--n-grid", vs_grid, "sizes: a,b,c or lo:hi:count (log-spaced)");
    add_out(vs);

    // bootstrap
    auto* bs = app.add_subcommand("bootstrap", "k-out-of-n bootstrap on a lat/lon sample");
    std::string bs_input;
    std::string bs_k = "1:1000";
    McArgs bs_mc;
    bs_mc.add_to(bs, 1000);
    bs->add_option("--input", bs_input, "lat/lon CSV")->required();
    bs->add_option("--k", bs_k, "resample sizes: a,b,c or lo:hi[:count]");
    add_out(bs);

    // shapes-sim
    auto* ss = app.add_subcommand("shapes-sim", "quadrangle pre-shapes about the unit square");
    int ss_k = 4;
    double ss_factor = 0.95;
    int ss_n = 100;
    std::string ss_grid;
    McArgs ss_mc;
    ss_mc.add_to(ss, 200);
    ss->add_option("--k", ss_k, "landmarks (4 or 6)")->check(CLI::IsMember({4, 6}));
    ss->add_option("--alpha-factor", ss_factor, "atom weight as a fraction of the critical weight");
    ss->add_option("--n", ss_n, "pre-shapes to write")->check(CLI::PositiveNumber);
    ss->add_option("--n-grid", ss_grid, "write a variance-scaling curve over these sizes instead");
    add_out(ss);

    // fss
    auto* fs = app.add_subcommand("fss", "finite sample smeariness of the ring model");
    int fs_m = 5;
    std::optional<double> fs_theta;
    double fs_ratio = 0.8;
    std::string fs_grid = "100000";
    McArgs fs_mc;
    fs_mc.add_to(fs, 200);
    fs_mc.center = "pole";
    fs_mc.local_cap = true;
    fs->add_option("--m", fs_m, "sphere dimension")->check(CLI::Range(4, 100000));
    fs->add_option("--theta-star", fs_theta, "ring polar angle (rad); default theta_m4 + 0.05");
    fs->add_option("--alpha-ratio", fs_ratio, "ring weight as a fraction of alpha0");
    fs->add_option("--n-grid", fs_grid, "sizes: a,b,c or lo:hi:count");
    add_out(fs);

    // convert-vgp
    auto* cv = app.add_subcommand("convert-vgp", "rewrite a VGP table as a lat/lon CSV");
    std::string cv_input;
    cv->add_option("--input", cv_input, "delimited VGP table")->required();
    add_out(cv);

    try {
        app.parse(static_cast<int>(expanded.size()), expanded.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        if (ca->parsed()) {
            const auto [lo, hi] = parse_int_range(m_range);
            if (lo < 2 || hi < lo) {
                throw InvalidInput("--m-range must satisfy 2 <= lo <= hi");
            }
            std::vector<CriticalAngleReport> reports;
            int violations = 0;
            for (int m = lo; m <= hi; ++m) {
                reports.push_back(critical_angle_report(m));
                for (const auto& b : reports.back().bounds) {
                    if (!b.pass()) {
                        ++violations;
                        std::cerr << "bound violated: m=" << m << ' ' << b.name << " value=" << format_double(b.value)
                                  << '\n';
                    }
                }
            }
            Output out(out_path);
            write_critical_angles_csv(out.stream(), reports);
            json meta = base_meta("critical-angles");
            meta["parameters"] = {{"m_lo", lo}, {"m_hi", hi}};
            meta["bound_violations"] = violations;
            out.sidecar(meta);
            return violations == 0 ? kOk : kConsistency;
        }

        if (pr->parsed()) {
            const RadialMixture dist = pr_model.build();
            if (!(psi_max > 0.0 && psi_max <= std::numbers::pi)) {
                throw InvalidInput("--psi-max must lie in (0, pi]");
            }
            std::vector<double> grid(psi_points);
            for (int i = 0; i < psi_points; ++i) {
                grid[i] = psi_max * i / (psi_points - 1);
            }
            std::vector<int> orders;
            for (int j = 1; j <= 4; ++j) {
                if (dist.dim() >= min_dimension_for_order(j, restricted)) {
                    orders.push_back(j);
                }
            }
            ProfileOptions po;
            po.closed_form_at_pole = !quadrature_only;
            po.allow_restricted_regime = restricted;
            const DerivativeProfile prof = derivative_profile(dist, grid, orders, po);
            Output out(out_path);
            write_profile_csv(out.stream(), prof);
            json meta = base_meta("profile");
            meta["parameters"] = pr_model.to_json();
            meta["parameters"]["psi_max"] = psi_max;
            meta["parameters"]["points"] = psi_points;
            meta["orders"] = orders;
            meta["method_at_pole"] = to_string(prof.method.front());
            out.sidecar(meta);
            return kOk;
        }

        if (th->parsed()) {
            std::vector<double> grid(th_points);
            for (int i = 0; i < th_points; ++i) {
                grid[i] = std::numbers::pi * (i + 1) / th_points;
            }
            Output out(out_path);
            auto& os = out.stream();
            os << "# units: delta rad, increments rad^2, hessian dimensionless, densities per unit area\n";
            os << "delta,m,alpha,min_increment,min_increment_psi,hessian_at_pole,south_pole_density,"
                  "density_lower_bound,pass\n";
            bool all = true;
            for (double d : deltas) {
                for (int m : th_dims) {
                    const CapConstructionReport r = verify_cap_construction(d, m, grid);
                    all = all && r.pass();
                    os << format_double(d) << ',' << m << ',' << format_double(r.alpha) << ','
                       << format_double(r.min_increment) << ',' << format_double(r.min_increment_psi) << ','
                       << format_double(r.hessian_at_pole) << ',' << format_double(r.south_pole_density) << ','
                       << format_double(r.density_lower_bound) << ',' << (r.pass() ? 1 : 0) << '\n';
                }
            }
            json meta = base_meta("verify-cap");
            meta["parameters"] = {{"delta", deltas}, {"m", th_dims}, {"points", th_points}};
            meta["all_pass"] = all;
            out.sidecar(meta);
            return all ? kOk : kConsistency;
        }

        if (vs->parsed()) {
            const RadialMixture dist = vs_model.build();
            const auto grid = parse_size_grid(vs_grid);
            const ScalingCurve curve =
                variance_scaling(dist, grid, vs_mc.replicates, vs_mc.seed, vs_mc.options(dist.dim()));
            Output out(out_path);
            write_scaling_csv(out.stream(), curve);
            json meta = base_meta("variance-scaling");
            meta["parameters"] = vs_model.to_json();
            meta["parameters"]["n_grid"] = grid;
            meta["monte_carlo"] = vs_mc.to_json();
            meta.update(curve_meta(curve));
            const double var_x = population_variance(dist);
            meta["var_x"] = var_x;
            meta["S_fs"] = var_x > 0.0 ? json(fss_magnitude(curve, var_x)) : json(nullptr);
            out.sidecar(meta);
            return kOk;
        }

        if (bs->parsed()) {
            const GeoSample geo = parse_latlon_csv(bs_input);
            for (const auto& r : geo.rejected) {
                std::cerr << bs_input << ':' << r.line << ": rejected (" << r.reason << ")\n";
            }
            if (geo.size() == 0) {
                throw InvalidInput("no valid rows in " + bs_input);
            }
            const Matrix x = geo.matrix();
            const auto grid = parse_size_grid(bs_k);
            const ScalingCurve curve = bootstrap_k_of_n(x, grid, bs_mc.replicates, bs_mc.seed, bs_mc.options(2));
            Output out(out_path);
            write_scaling_csv(out.stream(), curve);
            json meta = base_meta("bootstrap");
            meta["parameters"] = {{"input", geo.label},
                                  {"n", geo.size()},
                                  {"rejected_rows", geo.rejected.size()},
                                  {"k_grid", grid}};
            meta["monte_carlo"] = bs_mc.to_json();
            meta.update(curve_meta(curve));
            MeanOptions mo;
            const MeanResult mean = frechet_mean(x, mo);
            meta["sample_frechet_variance"] = mean.frechet_value;
            meta["S_fs"] = mean.frechet_value > 0.0 ? json(fss_magnitude(curve, mean.frechet_value)) : json(nullptr);
            out.sidecar(meta);
            return kOk;
        }

        if (ss->parsed()) {
            const QuadrangleModel model = quadrangle_model(ss_k, ss_factor);
            Output out(out_path);
            json meta = base_meta("shapes-sim");
            meta["parameters"] = {{"k", ss_k},
                                  {"alpha_factor", ss_factor},
                                  {"alpha_crit", model.alpha_crit},
                                  {"atom_weight", model.alpha},
                                  {"hessian", model.hessian},
                                  {"sphere_dim", 2 * ss_k - 3}};
            meta["monte_carlo"] = ss_mc.to_json();
            const int dim = model.dist.dim();
            if (ss_grid.empty()) {
                Rng rng(ss_mc.seed);
                write_preshapes_csv(out.stream(), simulate_quadrangles_matrix(model, ss_n, rng));
                meta["parameters"]["n"] = ss_n;
            } else {
                const auto grid = parse_size_grid(ss_grid);
                ExperimentOptions eo = ss_mc.options(dim);
                if (eo.center == VarianceCenter::KnownPole) {
                    throw InvalidInput("shapes-sim: --center pole is not meaningful for rotated pre-shapes");
                }
                if (eo.mean.cap) {
                    eo.mean.cap->center = model.base.point;
                }
                const ScalingCurve curve = scaling_curve(
                    [&](int n, Rng& rng) { return simulate_quadrangles_matrix(model, n, rng); }, dim, grid,
                    ss_mc.replicates, ss_mc.seed, eo);
                write_scaling_csv(out.stream(), curve);
                meta["parameters"]["n_grid"] = grid;
                meta.update(curve_meta(curve));
                const double var_x = population_variance(model.dist);
                meta["var_x"] = var_x;
                meta["S_fs"] = fss_magnitude(curve, var_x);
            }
            out.sidecar(meta);
            return kOk;
        }

        if (fs->parsed()) {
            const double theta = fs_theta ? *fs_theta : theta_m4(fs_m) + 0.05;
            const double alpha0 = ring_alpha0(fs_m, theta);
            const double alpha = fs_ratio * alpha0;
            const RadialMixture dist = ring_model(fs_m, alpha, theta);
            const auto grid = parse_size_grid(fs_grid);
            const ScalingCurve curve =
                variance_scaling(dist, grid, fs_mc.replicates, fs_mc.seed, fs_mc.options(fs_m));
            Output out(out_path);
            write_scaling_csv(out.stream(), curve);
            const double var_x = population_variance(dist);
            json meta = base_meta("fss");
            meta["parameters"] = {{"model", "ring"}, {"m", fs_m}, {"theta_star", theta}, {"alpha", alpha},
                                  {"alpha0", alpha0}, {"alpha_ratio", fs_ratio}, {"n_grid", grid}};
            meta["monte_carlo"] = fs_mc.to_json();
            meta.update(curve_meta(curve));
            meta["var_x"] = var_x;
            meta["S_fs"] = fss_magnitude(curve, var_x);
            meta["S_fs_theory"] = ring_fss_theory(alpha, alpha0);
            out.sidecar(meta);
            return kOk;
        }

        if (cv->parsed()) {
            std::ifstream in(cv_input);
            if (!in) {
                throw InvalidInput("cannot open " + cv_input);
            }
            Output out(out_path);
            const std::size_t rows = convert_vgp(in, out.stream());
            json meta = base_meta("convert-vgp");
            meta["parameters"] = {{"input", cv_input}};
            meta["rows_written"] = rows;
            out.sidecar(meta);
            return kOk;
        }
    } catch (const InternalConsistencyError& e) {
        std::cerr << "internal consistency: " << e.what() << '\n';
        return kConsistency;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence: " << e.what() << '\n';
        return kConvergence;
    } catch (const ExperimentError& e) {
        std::cerr << "convergence: " << e.what() << '\n';
        return kConvergence;
    } catch (const AccuracyError& e) {
        std::cerr << "convergence: " << e.what() << '\n';
        return kConvergence;
    } catch (const Error& e) {
        std::cerr << "validation: " << e.what() << '\n';
        return kValidation;
    }
    return kValidation;
}
