// funcdec: decompose expressions, simplify them, build graph sets and check
// containment from the command line.
//
// Exit status: 0 success, 1 usage or parse error, 2 numerical or budget
// failure, 3 verification failure.

#include <funcdec/funcdec.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace funcdec;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerification = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VarSpec {
    std::string name;
    std::optional<Interval> domain;
};

struct JobConfig {
    std::vector<std::string> exprs;
    std::string fd_file;
    std::vector<std::string> var_args;
    std::vector<std::string> tol_args;
    std::optional<double> tol_default;
    std::string products;   // empty: the command default
    std::string protect;
    bool no_affine_fold = false;
    std::string out;
    std::uint64_t seed = 1;
    std::string format;
    std::size_t samples = 1000;
    std::size_t boundary = 50;
    bool leaves = false;
    bool verify = false;
    double contain_tol = 1e-6;
    std::string set_file;
    std::string points_file;
    // lstm
    std::string weights;
    std::size_t N = 5;
    std::size_t d = 1;
    double scale = 1.0;
    bool output_cell = false;
    bool build_set = false;
    // dha
    std::size_t checks = 1000;
};

// ---------------------------------------------------------------------------
// Argument parsing helpers

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("bad number '" + s + "' in " + what);
    }
    if (used != s.size()) throw UsageError("bad number '" + s + "' in " + what);
    return v;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// "x=[-3.14,3.14]" or a bare name.
VarSpec parse_var(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) return {trim(arg), std::nullopt};
    VarSpec v{trim(arg.substr(0, eq)), std::nullopt};
    std::string rest = trim(arg.substr(eq + 1));
    if (rest.size() < 2 || rest.front() != '[' || rest.back() != ']') throw UsageError("domain must look like name=[lo,hi]: " + arg);
    rest = rest.substr(1, rest.size() - 2);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw UsageError("domain must look like name=[lo,hi]: " + arg);
    const double lo = parse_number(trim(rest.substr(0, comma)), arg);
    const double hi = parse_number(trim(rest.substr(comma + 1)), arg);
    if (!(lo <= hi)) throw UsageError("empty domain in " + arg);
    v.domain = Interval(lo, hi);
    return v;
}

std::vector<VarSpec> parse_vars(const std::vector<std::string>& args) {
    std::vector<VarSpec> out;
    for (const auto& a : args) {
        // Several domains may share one flag: x=[0,1],y=[2,3].
        std::size_t depth = 0, start = 0;
        for (std::size_t i = 0; i <= a.size(); ++i) {
            if (i < a.size() && a[i] == '[') ++depth;
            if (i < a.size() && a[i] == ']') --depth;
            if (i == a.size() || (a[i] == ',' && depth == 0)) {
                const auto piece = trim(a.substr(start, i - start));
                if (!piece.empty()) out.push_back(parse_var(piece));
                start = i + 1;
            }
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (out[i].name == out[j].name) throw UsageError("variable '" + out[i].name + "' given twice");
        }
    }
    return out;
}

ApproxConfig approx_config(const JobConfig& cfg) {
    ApproxConfig a;
    if (cfg.tol_default) a.tol = *cfg.tol_default;
    for (const auto& t : cfg.tol_args) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw UsageError("--tol expects <primitive>=<eps>: " + t);
        const auto name = trim(t.substr(0, eq));
        if (!prim_from_name(name)) throw UsageError("--tol: unknown primitive '" + name + "'");
        a.tol_by_prim[name] = parse_number(trim(t.substr(eq + 1)), t);
    }
    if (cfg.products.empty() || cfg.products == "rewrite") {
        a.product_mode = ProductMode::Rewrite;
    } else if (cfg.products == "direct") {
        a.product_mode = ProductMode::Direct;
    } else {
        throw UsageError("--products must be rewrite or direct");
    }
    a.validate();
    return a;
}

// 1-based indices, comma or space separated.
std::vector<std::size_t> parse_protect(const std::string& s) {
    std::vector<std::size_t> out;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, ',')) {
        std::istringstream words(tok);
        std::string w;
        while (words >> w) {
            const double v = parse_number(w, "--protect");
            if (v < 1 || v != std::floor(v)) throw UsageError("--protect indices are 1-based integers");
            out.push_back(static_cast<std::size_t>(v) - 1);
        }
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

std::optional<fs::path> out_dir(const JobConfig& cfg) {
    if (cfg.out.empty()) return std::nullopt;
    fs::create_directories(cfg.out);
    return fs::path(cfg.out);
}

// ---------------------------------------------------------------------------
// Decomposition pipeline

struct Stages {
    FunctionalDecomposition basic;
    FunctionalDecomposition deduped;
    FunctionalDecomposition folded;
    FunctionalDecomposition reduced;
    std::vector<std::size_t> protect;   // indices into `folded`
};

std::vector<std::string> variable_order(const std::vector<RpnExpr>& rpns, const std::vector<VarSpec>& vars) {
    std::vector<std::string> seen;
    for (const auto& r : rpns) {
        for (const auto& v : r.variables()) {
            if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
        }
    }
    if (vars.empty()) return seen;
    std::vector<std::string> order;
    for (const auto& v : vars) order.push_back(v.name);
    for (const auto& v : seen) {
        if (std::find(order.begin(), order.end(), v) == order.end()) {
            throw UsageError("variable '" + v + "' is missing from --vars");
        }
    }
    return order;
}

Stages run_pipeline(const JobConfig& cfg, const std::vector<VarSpec>& vars) {
    if (cfg.exprs.empty()) throw UsageError("at least one --expr is required");
    std::vector<RpnExpr> rpns;
    for (const auto& e : cfg.exprs) rpns.push_back(parse(e));
    const auto names = variable_order(rpns, vars);
    Stages s;
    if (rpns.size() == 1) {
        s.basic = decompose_basic(rpns[0], names);
        s.deduped = decompose_dedup(rpns[0], names);
    } else {
        const auto wrapped = wrap_vector(rpns);
        s.basic = decompose_basic(wrapped, names);
        s.deduped = decompose_dedup(wrapped, names);
    }
    auto protect = parse_protect(cfg.protect);
    for (auto p : protect) {
        if (p >= s.deduped.size()) throw UsageError("--protect index " + std::to_string(p + 1) + " is out of range");
    }
    if (cfg.no_affine_fold) {
        s.folded = s.deduped;
        s.protect = protect;
    } else {
        std::vector<std::optional<std::size_t>> map;
        s.folded = fold_affine(s.deduped, protect, &map);
        for (auto p : protect) s.protect.push_back(*map[p]);
    }
    s.reduced = reduce(s.folded, s.protect);
    return s;
}

// The decomposition a set-building command works on.
FunctionalDecomposition target_decomposition(const JobConfig& cfg, const std::vector<VarSpec>& vars) {
    if (!cfg.fd_file.empty()) {
        if (!cfg.exprs.empty()) throw UsageError("--fd and --expr are mutually exclusive");
        return fd_from_json(read_file(cfg.fd_file));
    }
    return run_pipeline(cfg, vars).reduced;
}

std::vector<std::string> input_names(const FunctionalDecomposition& fd) {
    if (fd.variable_names.size() == fd.n_x) return fd.variable_names;
    std::vector<std::string> n;
    for (std::size_t k = 0; k < fd.n_x; ++k) n.push_back("x" + std::to_string(k + 1));
    return n;
}

std::vector<Interval> domain_for(const FunctionalDecomposition& fd, const std::vector<VarSpec>& vars,
                                 std::optional<Interval> fallback = std::nullopt) {
    std::vector<Interval> dom;
    for (const auto& name : input_names(fd)) {
        auto it = std::find_if(vars.begin(), vars.end(), [&](const VarSpec& v) { return v.name == name; });
        if (it != vars.end() && it->domain) {
            dom.push_back(*it->domain);
        } else if (fallback) {
            dom.push_back(*fallback);
        } else {
            throw UsageError("no domain for variable '" + name + "' (use --vars " + name + "=[lo,hi])");
        }
    }
    return dom;
}

// Uniform samples of the graph (p, f(p)) over the box.
std::vector<Eigen::VectorXd> graph_samples(const FunctionalDecomposition& fd, std::span<const Interval> dom, std::size_t n,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> p(fd.n_x);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < fd.n_x; ++i) p[i] = std::uniform_real_distribution<double>(dom[i].lo, dom[i].hi)(rng);
        const auto y = eval_fd(fd, p);
        Eigen::VectorXd v(static_cast<Eigen::Index>(fd.n_x + y.size()));
        for (std::size_t i = 0; i < fd.n_x; ++i) v(static_cast<Eigen::Index>(i)) = p[i];
        for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(fd.n_x + i)) = y[i];
        pts.push_back(std::move(v));
    }
    return pts;
}

std::size_t count_contained(const HybridZonotope& Z, const std::vector<Eigen::VectorXd>& pts, double tol,
                            std::vector<char>* verdicts = nullptr) {
    std::size_t ok = 0;
    for (const auto& p : pts) {
        if (p.size() != Z.dim()) {
            throw DimensionError("point has " + std::to_string(p.size()) + " coordinates, set has " + std::to_string(Z.dim()));
        }
        const bool in = contains(Z, p, tol);
        ok += in;
        if (verdicts) verdicts->push_back(in);
    }
    return ok;
}

// Lower and upper output envelope over a grid of the single input.
std::string boundary_csv(const GraphSet& gs, const Interval& dom, std::size_t n) {
    const auto dim = gs.set.dim();
    std::ostringstream s;
    s.precision(17);
    s << gs.coordinates[0];
    for (Eigen::Index k = 1; k < dim; ++k) s << ',' << gs.coordinates[static_cast<std::size_t>(k)] << "_lo," << gs.coordinates[static_cast<std::size_t>(k)] << "_hi";
    s << '\n';
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(1, dim);
    R(0, 0) = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = n == 1 ? dom.mid() : dom.lo + dom.width() * static_cast<double>(i) / static_cast<double>(n - 1);
        const auto slice = intersect_lifted(gs.set, HybridZonotope::point(Eigen::VectorXd::Constant(1, x)), R);
        const auto hull = interval_hull(slice);
        s << x;
        for (Eigen::Index k = 1; k < dim; ++k) s << ',' << hull[static_cast<std::size_t>(k)].lo << ',' << hull[static_cast<std::size_t>(k)].hi;
        s << '\n';
    }
    return s.str();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_decompose(const JobConfig& cfg) {
    const auto vars = parse_vars(cfg.var_args);
    const auto s = run_pipeline(cfg, vars);
    if (cfg.format == "csv") throw UsageError("decompose writes json or dot");
    const bool want_json = cfg.format != "dot";
    const bool want_dot = cfg.format != "json";
    if (auto dir = out_dir(cfg)) {
        const std::pair<const char*, const FunctionalDecomposition*> stages[] = {
            {"basic", &s.basic}, {"dedup", &s.deduped}, {"reduced", &s.reduced}};
        for (const auto& [name, fd] : stages) {
            if (want_json) write_file(*dir / (std::string(name) + ".json"), to_json(*fd));
            if (want_dot) write_file(*dir / (std::string(name) + ".dot"), to_dot(build_graph(*fd)));
        }
    }
    json summary;
    summary["basic"] = s.basic.size();
    summary["dedup"] = s.deduped.size();
    summary["folded"] = s.folded.size();
    summary["reduced"] = s.reduced.size();
    summary["inputs"] = s.reduced.n_x;
    if (auto dir = out_dir(cfg)) write_file(*dir / "summary.json", summary.dump(2));
    if (cfg.format == "json") {
        std::cout << summary.dump(2) << '\n';
    } else {
        std::cout << "observables: basic " << s.basic.size() << " -> dedup " << s.deduped.size() << " -> reduced "
                  << s.reduced.size() << '\n'
                  << s.reduced.to_string();
    }
    return 0;
}

int cmd_graphset(const JobConfig& cfg) {
    const auto vars = parse_vars(cfg.var_args);
    const auto fd = target_decomposition(cfg, vars);
    const auto dom = domain_for(fd, vars);
    const auto acfg = approx_config(cfg);
    const auto gs = build_graph_set(fd, dom, acfg);
    json summary = json::parse(report_to_json(gs));
    if (cfg.leaves) summary["n_L"] = count_leaves(gs.set);
    std::vector<Eigen::VectorXd> samples;
    if (cfg.verify || !cfg.out.empty()) samples = graph_samples(fd, dom, cfg.samples, cfg.seed);
    std::size_t contained = 0;
    if (cfg.verify) {
        contained = count_contained(gs.set, samples, cfg.contain_tol);
        summary["samples"] = samples.size();
        summary["contained"] = contained;
    }
    if (auto dir = out_dir(cfg)) {
        write_file(*dir / "set.json", hz_to_json(gs.set));
        write_file(*dir / "decomposition.json", to_json(fd));
        write_file(*dir / "report.json", summary.dump(2));
        write_file(*dir / "samples.csv", points_to_csv(samples, gs.coordinates));
        if (fd.n_x == 1 && cfg.boundary > 0) write_file(*dir / "boundary.csv", boundary_csv(gs, dom[0], cfg.boundary));
    }
    if (cfg.format == "json") {
        std::cout << summary.dump(2) << '\n';
    } else {
        std::cout << "n_g " << gs.set.n_g() << " n_b " << gs.set.n_b() << " n_c " << gs.set.n_c();
        if (cfg.leaves) std::cout << " n_L " << summary["n_L"].get<std::size_t>();
        std::cout << " segments " << gs.total_segments << '\n';
        if (cfg.verify) std::cout << "contained " << contained << '/' << samples.size() << '\n';
    }
    if (cfg.verify && contained != samples.size()) throw VerificationFailure("graph samples escaped the set");
    return 0;
}

int cmd_check(const JobConfig& cfg) {
    if (cfg.set_file.empty() || cfg.points_file.empty()) throw UsageError("check needs --set and --points");
    const auto Z = hz_from_json(read_file(cfg.set_file));
    const auto pts = points_from_csv(read_file(cfg.points_file));
    if (pts.empty()) {
        std::cerr << "warning: no points to check; vacuous pass\n";
        std::cout << "contained 0/0\n";
        return 0;
    }
    std::vector<char> verdicts;
    const auto ok = count_contained(Z, pts, cfg.contain_tol, &verdicts);
    std::ostringstream csv;
    csv << "index,contained\n";
    for (std::size_t i = 0; i < verdicts.size(); ++i) csv << i + 1 << ',' << int(verdicts[i]) << '\n';
    if (auto dir = out_dir(cfg)) write_file(*dir / "check.csv", csv.str());
    const double rate = static_cast<double>(ok) / static_cast<double>(pts.size());
    if (cfg.format == "csv") std::cout << csv.str();
    if (cfg.format == "json") {
        json j;
        j["points"] = pts.size();
        j["contained"] = ok;
        j["rate"] = rate;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "contained " << ok << '/' << pts.size() << " (" << 100.0 * rate << "%)\n";
    }
    return ok == pts.size() ? 0 : kExitVerification;
}

int cmd_leaves(const JobConfig& cfg) {
    if (cfg.set_file.empty()) throw UsageError("leaves needs --set");
    const auto Z = hz_from_json(read_file(cfg.set_file));
    json j;
    j["n"] = Z.dim();
    j["n_g"] = Z.n_g();
    j["n_b"] = Z.n_b();
    j["n_c"] = Z.n_c();
    j["n_L"] = count_leaves(Z);
    if (cfg.format == "json") {
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "n_L " << j["n_L"].get<std::size_t>() << '\n';
    }
    return 0;
}

int cmd_lstm(const JobConfig& cfg) {
    LstmSpec spec = cfg.weights.empty() ? LstmSpec::random(cfg.N, cfg.d, cfg.seed, cfg.scale) : lstm_from_json(read_file(cfg.weights));
    if (cfg.output_cell) spec.output_cell = true;
    const auto fd = lstm_ingest(spec);
    const auto deduped = dedup(fd);
    const auto reduced = reduce(deduped);
    json summary;
    summary["N"] = spec.N;
    summary["d"] = spec.d;
    summary["ingested"] = fd.size();
    summary["dedup"] = deduped.size();
    summary["reduced"] = reduced.size();

    // Agreement with the direct recurrence on random states in [-1,1].
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto N = static_cast<Eigen::Index>(spec.N), d = static_cast<Eigen::Index>(spec.d);
    double worst = 0.0;
    for (std::size_t k = 0; k < cfg.samples; ++k) {
        Eigen::VectorXd x(d), h(N), c(N);
        for (auto* v : {&x, &h, &c}) {
            for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) = u(rng);
        }
        std::vector<double> in(x.data(), x.data() + d);
        in.insert(in.end(), h.data(), h.data() + N);
        in.insert(in.end(), c.data(), c.data() + N);
        const auto got = eval_fd(reduced, in);
        const auto want = lstm_step(spec, x, h, c);
        for (Eigen::Index i = 0; i < N; ++i) worst = std::max(worst, std::abs(got[static_cast<std::size_t>(i)] - want.h(i)));
        if (spec.output_cell) {
            for (Eigen::Index i = 0; i < N; ++i) worst = std::max(worst, std::abs(got[static_cast<std::size_t>(N + i)] - want.c(i)));
        }
    }
    summary["max_eval_error"] = worst;

    std::optional<GraphSet> gs;
    std::size_t contained = 0, n_samples = 0;
    if (cfg.build_set) {
        const auto vars = parse_vars(cfg.var_args);
        const auto dom = domain_for(reduced, vars, Interval(-1.0, 1.0));
        gs = build_graph_set(reduced, dom, approx_config(cfg));
        summary["n_g"] = gs->set.n_g();
        summary["n_b"] = gs->set.n_b();
        summary["n_c"] = gs->set.n_c();
        const auto pts = graph_samples(reduced, dom, cfg.samples, cfg.seed + 1);
        contained = count_contained(gs->set, pts, cfg.contain_tol);
        n_samples = pts.size();
        summary["contained"] = contained;
        summary["samples"] = n_samples;
    }
    if (auto dir = out_dir(cfg)) {
        write_file(*dir / "lstm.json", lstm_to_json(spec));
        write_file(*dir / "decomposition.json", to_json(reduced));
        write_file(*dir / "summary.json", summary.dump(2));
        if (gs) {
            write_file(*dir / "set.json", hz_to_json(gs->set));
            write_file(*dir / "report.json", report_to_json(*gs));
        }
    }
    if (cfg.format == "json") {
        std::cout << summary.dump(2) << '\n';
    } else {
        std::cout << "observables: ingested " << fd.size() << " -> dedup " << deduped.size() << " -> reduced " << reduced.size()
                  << '\n'
                  << "max |eval_fd - direct| " << worst << " over " << cfg.samples << " inputs\n";
        if (gs) std::cout << "contained " << contained << '/' << n_samples << '\n';
    }
    if (worst > 1e-9) throw VerificationFailure("decomposition disagrees with the direct LSTM step");
    if (gs && contained != n_samples) throw VerificationFailure("graph samples escaped the LSTM set");
    return 0;
}

int cmd_dha(const JobConfig& cfg) {
    const auto vars = parse_vars(cfg.var_args);
    const auto full = dha_decomposition();
    const auto reduced = dha_reduced();
    std::vector<Interval> dom = {Interval(-2.0, 2.0), Interval(-1.0, 1.0)};
    for (const auto& v : vars) {
        if (!v.domain) continue;
        if (v.name == "x") {
            dom[0] = *v.domain;
        } else if (v.name == "u") {
            dom[1] = *v.domain;
        } else {
            throw UsageError("the automaton has variables x and u, not '" + v.name + "'");
        }
    }
    // Products of {0,1}-valued mode indicators are gated exactly in direct mode.
    auto acfg = approx_config(cfg);
    if (cfg.products.empty()) acfg.product_mode = ProductMode::Direct;
    const auto gs = build_graph_set(reduced, dom, acfg);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ux(dom[0].lo, dom[0].hi), uu(dom[1].lo, dom[1].hi);
    std::size_t mismatches = 0, contained = 0, checked = 0;
    while (checked < cfg.checks) {
        const double x = ux(rng), u = uu(rng);
        if (std::abs(x) < 1e-9 || std::abs(x + u - 1.0) < 1e-9) continue;
        ++checked;
        const auto want = dha_simulate(x, u);
        const auto got = dha_evaluate(reduced, x, u);
        if (got.mode != want.mode || std::abs(got.next - want.next) > 1e-9) ++mismatches;
        contained += contains(gs.set, Eigen::Vector3d(x, u, want.next), cfg.contain_tol);
    }
    json summary;
    summary["dedup"] = full.size();
    summary["reduced"] = reduced.size();
    summary["n_g"] = gs.set.n_g();
    summary["n_b"] = gs.set.n_b();
    summary["n_c"] = gs.set.n_c();
    summary["transitions"] = checked;
    summary["mismatches"] = mismatches;
    summary["contained"] = contained;
    if (auto dir = out_dir(cfg)) {
        write_file(*dir / "dha_dedup.json", to_json(full));
        write_file(*dir / "dha_reduced.json", to_json(reduced));
        write_file(*dir / "set.json", hz_to_json(gs.set));
        write_file(*dir / "report.json", report_to_json(gs));
        write_file(*dir / "summary.json", summary.dump(2));
    }
    if (cfg.format == "json") {
        std::cout << summary.dump(2) << '\n';
    } else {
        std::cout << "observables: dedup " << full.size() << " -> reduced " << reduced.size() << '\n'
                  << reduced.to_string() << "simulated transitions " << checked << ", mismatches " << mismatches
                  << ", contained " << contained << '/' << checked << '\n';
    }
    if (mismatches || contained != checked) throw VerificationFailure("automaton check failed");
    return 0;
}

void add_common(CLI::App* sub, JobConfig& cfg) {
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "dot", "csv"}));
    sub->add_option("--out", cfg.out, "Directory for artifacts");
}

void add_build(CLI::App* sub, JobConfig& cfg) {
    sub->add_option("--vars", cfg.var_args, "Variable domains, e.g. x=[-3.14,3.14] (repeatable)");
    sub->add_option("--tol", cfg.tol_args, "Per-primitive band half-width, e.g. sin=0.1 (repeatable)");
    sub->add_option("--tol-default", cfg.tol_default, "Band half-width for primitives without --tol");
    sub->add_option("--products", cfg.products, "Product handling")->check(CLI::IsMember({"rewrite", "direct"}));
    sub->add_option("--seed", cfg.seed, "Seed for sampling");
    sub->add_option("--samples", cfg.samples, "Number of sampled graph points");
    sub->add_option("--contain-tol", cfg.contain_tol, "Containment tolerance (infinity norm)");
}

void add_expr(CLI::App* sub, JobConfig& cfg) {
    sub->add_option("--expr", cfg.exprs, "Expression (repeat for a vector-valued function)");
    sub->add_option("--protect", cfg.protect, "1-based observables kept by reduction, e.g. 4,8");
    sub->add_flag("--no-affine-fold", cfg.no_affine_fold, "Skip folding of affine chains");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional decomposition and graph over-approximation"};
    app.require_subcommand(1);
    JobConfig cfg;

    auto* dec = app.add_subcommand("decompose", "Decompose, deduplicate and reduce expressions");
    add_expr(dec, cfg);
    add_common(dec, cfg);
    dec->add_option("--vars", cfg.var_args, "Variable order (domains are ignored)");

    auto* gset = app.add_subcommand("graphset", "Build a hybrid-zonotope graph over-approximation");
    add_expr(gset, cfg);
    add_common(gset, cfg);
    add_build(gset, cfg);
    gset->add_option("--fd", cfg.fd_file, "Decomposition JSON instead of --expr");
    gset->add_flag("--leaves", cfg.leaves, "Also count leaves");
    gset->add_flag("--verify", cfg.verify, "Check that sampled graph points are contained");
    gset->add_option("--boundary", cfg.boundary, "Grid points of the sampled envelope (single input only)");

    auto* chk = app.add_subcommand("check", "Check points against a set");
    add_common(chk, cfg);
    chk->add_option("--set", cfg.set_file, "Hybrid zonotope JSON")->required();
    chk->add_option("--points", cfg.points_file, "CSV of points")->required();
    chk->add_option("--contain-tol", cfg.contain_tol, "Containment tolerance (infinity norm)");

    auto* lv = app.add_subcommand("leaves", "Count the leaves of a set");
    add_common(lv, cfg);
    lv->add_option("--set", cfg.set_file, "Hybrid zonotope JSON")->required();

    auto* ls = app.add_subcommand("lstm", "Ingest one LSTM step");
    add_common(ls, cfg);
    add_build(ls, cfg);
    ls->add_option("--weights", cfg.weights, "LSTM weights JSON (random weights otherwise)");
    ls->add_option("--N", cfg.N, "Node count for random weights");
    ls->add_option("--d", cfg.d, "Input dimension for random weights");
    ls->add_option("--scale", cfg.scale, "Random weights are uniform in [-scale, scale]");
    ls->add_flag("--output-cell", cfg.output_cell, "Expose the cell state as outputs");
    ls->add_flag("--build-set", cfg.build_set, "Build and check the graph set (domains default to [-1,1])");

    auto* dh = app.add_subcommand("dha", "Three-mode hybrid automaton demo");
    add_common(dh, cfg);
    add_build(dh, cfg);
    dh->add_option("--checks", cfg.checks, "Number of simulated transitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (dec->parsed()) return cmd_decompose(cfg);
        if (gset->parsed()) return cmd_graphset(cfg);
        if (chk->parsed()) return cmd_check(cfg);
        if (lv->parsed()) return cmd_leaves(cfg);
        if (ls->parsed()) return cmd_lstm(cfg);
        if (dh->parsed()) return cmd_dha(cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvariantError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitUsage;
    } catch (const VerificationFailure& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kExitVerification;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}
