// lpq: best approximation by simple functions in L^p norms, from the
// command line. JSON reports on stdout, diagnostics on stderr.

#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lpquant/lpquant.hpp"

namespace {

using namespace lpquant;

struct Options {
    std::string space_path;
    std::string norm_spec = "euclidean";
    std::string p_str = "2";
    int k = 1;
    std::uint64_t seed = 0;
    double tol = 1e-9;
    int max_iter = 10000;
    int restarts = 8;
    int jobs = 1;
    double tie_tol = 1e-9;
    bool pinned_zero = false;

    std::string cell_str;       // pmean
    std::string function_path;  // certify

    double max_assignments = 17'000'000.0;  // oracle guards
    int max_atoms = 12;
    int max_groups = 4;

    double p() const {
        if (p_str == "inf") return kInf;
        try {
            std::size_t used = 0;
            const double v = std::stod(p_str, &used);
            detail::check(used == p_str.size() && std::isfinite(v) && v >= 1.0,
                          "");
            return v;
        } catch (const std::exception&) {
            throw error("--p must be a number >= 1 or 'inf', got '" + p_str +
                        "'");
        }
    }

    QuantizerConfig quantizer_config() const {
        QuantizerConfig cfg;
        cfg.p = p();
        cfg.k = k;
        cfg.restarts = restarts;
        cfg.seed = seed;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.tie_tol = tie_tol;
        cfg.jobs = jobs;
        cfg.pinned_zero = pinned_zero;
        return cfg;
    }
};

std::string iso8601_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(JsonWriter& w, const Options& o,
                    const std::string& subcommand) {
    w.key("manifest").begin_object();
    w.key("tool").value("lpq");
    w.key("version").value(LPQUANT_VERSION);
    w.key("subcommand").value(subcommand);
    w.key("space").value(o.space_path);
    w.key("norm").value(o.norm_spec);
    w.key("config").begin_object();
    w.key("p").value(o.p_str);
    w.key("k").value(o.k);
    w.key("seed").value(o.seed);
    w.key("tol").value(o.tol);
    w.key("max_iter").value(o.max_iter);
    w.key("restarts").value(o.restarts);
    w.key("jobs").value(o.jobs);
    w.key("tie_tol").value(o.tie_tol);
    w.key("pinned_zero").value(o.pinned_zero);
    if (subcommand == "pmean")
        w.key("cell").value(o.cell_str.empty() ? "all" : o.cell_str);
    if (subcommand == "certify") w.key("function").value(o.function_path);
    if (subcommand == "oracle") {
        w.key("max_assignments").value(o.max_assignments);
        w.key("max_atoms").value(o.max_atoms);
        w.key("max_groups").value(o.max_groups);
    }
    w.end_object();
    w.key("timestamp").value(iso8601_now());
    w.key("seed_used").value(o.seed);
    w.end_object();
}

void write_certificate(JsonWriter& w, const Certificate& cert) {
    w.key("certificate").begin_object();
    w.key("voronoi_residual").value(cert.voronoi_residual);
    w.key("pmean_eps").value(cert.pmean_eps);
    w.key("boundary_mass").value(cert.boundary_mass);
    w.key("degree").value(cert.degree);
    w.end_object();
}

void write_best(JsonWriter& w, const SimpleFunction& h) {
    w.key("best").begin_object();
    w.key("centers").begin_array();
    for (const Vec& c : h.centers) w.value(c);
    w.end_array();
    w.key("assignment").value(h.assignment);
    w.key("background");
    if (h.background_center)
        w.value(*h.background_center);
    else
        w.null();
    w.end_object();
}

Cell parse_cell(const std::string& s, std::size_t atom_count) {
    Cell cell;
    if (s.empty()) {
        cell.resize(atom_count);
        for (std::size_t a = 0; a < atom_count; ++a)
            cell[a] = static_cast<int>(a);
        return cell;
    }
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            const int idx = std::stoi(tok, &used);
            detail::check(used == tok.size(), "");
            cell.push_back(idx);
        } catch (const std::exception&) {
            throw error("--cell must be comma-separated atom indices, got '" +
                        tok + "'");
        }
    }
    return cell;
}

int run_quantize(const Options& o) {
    const MeasureSpace sp = load_space(o.space_path);
    const NormDescriptor n = parse_norm(o.norm_spec, sp.dim());
    const QuantizeReport rep = lloyd(sp, n, o.quantizer_config());

    JsonWriter w;
    w.begin_object();
    write_manifest(w, o, "quantize");
    write_best(w, rep.best);
    w.key("cost").value(rep.cost);
    write_certificate(w, rep.certificate);
    w.key("trace").begin_array();
    for (const auto& restart : rep.trace) {
        w.begin_array();
        for (const auto& [it, c] : restart) w.pair_value(it, c);
        w.end_array();
    }
    w.end_array();
    w.end_object();
    std::cout << w.str() << "\n";
    return 0;
}

int run_pmean(const Options& o) {
    const MeasureSpace sp = load_space(o.space_path);
    const NormDescriptor n = parse_norm(o.norm_spec, sp.dim());
    const double p = o.p();
    const Cell cell = parse_cell(o.cell_str, sp.size());

    PMeanResult r;
    if (p == kInf) {
        r = chebyshev_center(sp, cell, n, o.tol);
    } else {
        PMeanOptions po;
        po.tol = o.tol;
        po.max_iter = o.max_iter;
        r = solve_pmean(sp, cell, n, p, po);
    }

    JsonWriter w;
    w.begin_object();
    write_manifest(w, o, "pmean");
    w.key("cell").value(cell);
    w.key("point").value(r.point);
    w.key("value").value(r.value);
    w.key("grad_norm").value(r.grad_norm);
    w.key("eps_certificate").value(r.eps_certificate);
    w.key("iterations").value(r.iterations);
    w.key("converged").value(r.converged);
    w.end_object();
    std::cout << w.str() << "\n";
    if (!r.converged)
        std::cerr << "lpq: pmean did not meet its certificate; best iterate "
                     "reported\n";
    return 0;
}

int run_oracle(const Options& o) {
    const MeasureSpace sp = load_space(o.space_path);
    const NormDescriptor n = parse_norm(o.norm_spec, sp.dim());
    OracleOptions opts;
    opts.max_assignments = o.max_assignments;
    opts.max_atoms = o.max_atoms;
    opts.max_groups = o.max_groups;
    opts.pinned_zero = o.pinned_zero;
    const OracleResult r = brute_force(sp, n, o.p(), o.k, opts);

    JsonWriter w;
    w.begin_object();
    write_manifest(w, o, "oracle");
    w.key("cost").value(r.cost);
    w.key("partition").begin_array();
    for (const Cell& g : r.partition) w.value(g);
    w.end_array();
    w.key("centers").begin_array();
    for (const Vec& c : r.centers) w.value(c);
    w.end_array();
    w.key("enumerated").value(r.enumerated);
    w.end_object();
    std::cout << w.str() << "\n";
    return 0;
}

int run_certify(const Options& o) {
    const MeasureSpace sp = load_space(o.space_path);
    const NormDescriptor n = parse_norm(o.norm_spec, sp.dim());
    const SimpleFunction g = load_simplefn(o.function_path);
    const Certificate cert = certify(sp, n, o.quantizer_config(), g);

    JsonWriter w;
    w.begin_object();
    write_manifest(w, o, "certify");
    write_certificate(w, cert);
    w.end_object();
    std::cout << w.str() << "\n";
    return 0;
}

int run_trace(const Options& o) {
    const MeasureSpace sp = load_space(o.space_path);
    const NormDescriptor n = parse_norm(o.norm_spec, sp.dim());
    const MinimizingTrace tr = minimizing_trace(sp, n, o.quantizer_config());

    JsonWriter w;
    w.begin_object();
    write_manifest(w, o, "trace");
    w.key("best_restart").value(tr.best_restart);
    w.key("flagged").value(tr.flagged);
    w.key("costs").value(Vec(tr.costs));
    w.key("displacements").value(Vec(tr.displacements));
    w.key("centers").begin_array();
    for (const auto& snapshot : tr.centers) {
        w.begin_array();
        for (const Vec& c : snapshot) w.value(c);
        w.end_array();
    }
    w.end_array();
    w.end_object();
    std::cout << w.str() << "\n";
    if (tr.flagged)
        std::cerr << "lpq: trace flagged: tail displacements are not "
                     "settling\n";
    return 0;
}

int emit_error(const std::string& type, const std::string& message) {
    JsonWriter w;
    w.begin_object();
    w.key("error").begin_object();
    w.key("type").value(type);
    w.key("message").value(message);
    w.end_object();
    w.end_object();
    std::cout << w.str() << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"best approximation by simple functions in L^p norms"};
    app.set_version_flag("--version", LPQUANT_VERSION);
    app.require_subcommand(1);

    const auto add_shared = [&](CLI::App* sub, bool require_k) {
        sub->add_option("--space", o.space_path, "space file (.json or .csv)")
            ->required();
        sub->add_option("--norm", o.norm_spec,
                        "norm spec: euclidean | q:<value> | "
                        "weighted:w1,...,wd")
            ->capture_default_str();
        sub->add_option("--p", o.p_str, "exponent in [1, inf); 'inf' literal")
            ->capture_default_str();
        auto* k = sub->add_option("--k", o.k, "number of values allowed");
        if (require_k) k->required();
        sub->add_option("--seed", o.seed, "restart seed")
            ->capture_default_str();
        sub->add_option("--tol", o.tol, "solver tolerance")
            ->capture_default_str();
        sub->add_option("--max-iter", o.max_iter, "iteration cap")
            ->capture_default_str();
        sub->add_option("--restarts", o.restarts, "independent restarts")
            ->capture_default_str();
        sub->add_option("--jobs", o.jobs, "concurrent restarts")
            ->capture_default_str();
        sub->add_option("--tie-tol", o.tie_tol,
                        "relative tie tolerance for assignment")
            ->capture_default_str();
        sub->add_flag("--pinned-zero", o.pinned_zero,
                      "pin one center to 0 (forced for infinite-mass "
                      "spaces)");
    };

    CLI::App* quantize =
        app.add_subcommand("quantize", "best k-valued approximation");
    add_shared(quantize, true);
    CLI::App* pmean =
        app.add_subcommand("pmean", "p-th mean of a cell of atoms");
    add_shared(pmean, false);
    pmean->add_option("--cell", o.cell_str,
                      "comma-separated atom indices (default: all)");
    CLI::App* oracle =
        app.add_subcommand("oracle", "exhaustive optimum on tiny instances");
    add_shared(oracle, true);
    oracle->add_option("--max-assignments", o.max_assignments,
                       "enumeration guard")
        ->capture_default_str();
    oracle->add_option("--max-atoms", o.max_atoms, "atom-count guard")
        ->capture_default_str();
    oracle->add_option("--max-groups", o.max_groups, "group-count guard")
        ->capture_default_str();
    CLI::App* certify_cmd = app.add_subcommand(
        "certify", "structure certificate for a simple function");
    add_shared(certify_cmd, false);
    certify_cmd
        ->add_option("--function", o.function_path,
                     "simple-function file (or a quantize report)")
        ->required();
    CLI::App* trace =
        app.add_subcommand("trace", "center trajectory of the best restart");
    add_shared(trace, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error("usage", e.what());
    }

    try {
        if (app.got_subcommand(quantize)) return run_quantize(o);
        if (app.got_subcommand(pmean)) return run_pmean(o);
        if (app.got_subcommand(oracle)) return run_oracle(o);
        if (app.got_subcommand(certify_cmd)) return run_certify(o);
        if (app.got_subcommand(trace)) return run_trace(o);
        return emit_error("usage", "no subcommand given");
    } catch (const error& e) {
        return emit_error("validation", e.what());
    } catch (const std::exception& e) {
        std::cerr << "lpq: unexpected error: " << e.what() << "\n";
        return 1;
    }
}
