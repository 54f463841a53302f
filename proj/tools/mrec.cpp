// mrec: verification campaigns for recovery maps, one-shot divergences,
// typicality, de Finetti witnesses and squashed-entanglement bounds.

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrec/mrec.hpp"

namespace {

using namespace mrec;

constexpr long long kVerifyDimCap = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
}

std::vector<int> parse_ints(const std::string& s, const char* what) {
    std::vector<int> out;
    for (const auto& part : split(s, ',')) {
        double v = parse_double(part);
        if (v != static_cast<int>(v) || v < 1) throw UsageError(std::string(what) + ": expected positive integers");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw UsageError(std::string(what) + ": empty list");
    return out;
}

/// "diag:a,b,..." or a state file path.
Matrix parse_operator(const std::string& spec) {
    const std::string prefix = "diag:";
    if (spec.rfind(prefix, 0) == 0) {
        std::vector<double> v;
        for (const auto& part : split(spec.substr(prefix.size()), ',')) v.push_back(parse_double(part));
        if (v.empty()) throw UsageError("diag: needs at least one entry");
        Matrix m = Matrix::Zero(v.size(), v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < 0.0) throw UsageError("diag: entries must be non-negative");
            m(i, i) = v[i];
        }
        return m;
    }
    return read_state(spec).matrix;
}

struct Budget {
    int restarts = 20;
    int iterations = 500;
};

Budget parse_budget(const std::string& s) {
    auto v = split(s, ',');
    if (v.size() != 2) throw UsageError("--budget expects R,I");
    double r = parse_double(v[0]), i = parse_double(v[1]);
    if (r < 1 || i < 0 || r != static_cast<int>(r) || i != static_cast<int>(i))
        throw UsageError("--budget expects a positive restart count and a non-negative iteration count");
    return {static_cast<int>(r), static_cast<int>(i)};
}

struct Output {
    std::string path;
    std::string format = "csv";

    void emit(const Table& t, const std::string& command) const {
        std::ofstream file;
        std::ostream* os = &std::cout;
        if (!path.empty()) {
            file.open(path);
            if (!file) throw UsageError("cannot open output file '" + path + "'");
            os = &file;
        }
        if (format == "json")
            t.write_json(*os, command);
        else
            t.write_csv(*os);
    }
};

void add_output(CLI::App* cmd, Output& out) {
    cmd->add_option("--out", out.path, "Output file (default stdout)");
    cmd->add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

// ---- commands; each returns the exit code ----

int cmd_cmi(const std::string& file, const Output& out) {
    MultipartiteState s = read_state(file);
    if (s.dims.size() < 3) throw UsageError("cmi: state needs at least three subsystems");
    std::vector<std::string> a{s.dims.label(0)}, b{s.dims.label(1)}, c;
    for (std::size_t i = 2; i < s.dims.size(); ++i) c.push_back(s.dims.label(i));
    EntropyReport r = cmi(s.matrix, s.dims, a, b, c);
    Table t{{"H_ABC", "H_AB", "H_BC", "H_B", "cmi"}, {}};
    t.add({r.H_ABC, r.H_AB, r.H_BC, r.H_B, r.cmi});
    out.emit(t, "cmi");
    return 0;
}

struct VerifyConfig {
    int trials = 10;
    std::string dims = "2,2,2";
    std::uint64_t seed = 0;
    std::string budget = "20,500";
    bool markov = false;
};

int cmd_verify_fr(const VerifyConfig& cfg, const Output& out) {
    std::vector<int> d = parse_ints(cfg.dims, "--dims");
    if (d.size() != 3) throw UsageError("--dims expects dA,dB,dC");
    if (static_cast<long long>(d[0]) * d[1] * d[2] > kVerifyDimCap)
        throw UsageError("--dims: dA·dB·dC exceeds the cap of 64");
    if (cfg.trials < 1) throw UsageError("--trials must be positive");
    Budget b = parse_budget(cfg.budget);
    Table t{{"trial", "seed", "cmi_bits", "target_fidelity", "petz_fidelity", "optimized_fidelity", "slack"}, {}};
    bool violated = false;
    for (int i = 0; i < cfg.trials; ++i) {
        const std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(i);
        MultipartiteState rho;
        if (cfg.markov)
            rho = qcq_markov_reconstruction(random_qcq(d[1], d[0], d[2], Rng(s)));
        else
            rho = random_density(SystemDims({d[0], d[1], d[2]}), Rng(s));
        RecoveryResult r = optimize_recovery(rho, b.restarts, b.iterations, s);
        const auto& c = r.certificate;
        if (c.slack < -1e-6) violated = true;
        if (cfg.markov && r.achieved_fidelity < 1.0 - 1e-7) violated = true;
        t.add({static_cast<long long>(i), static_cast<long long>(s), c.cmi_bits, c.target_fidelity, r.petz_fidelity,
               r.achieved_fidelity, c.slack});
    }
    out.emit(t, "verify-fr");
    return violated ? 1 : 0;
}

struct OneshotConfig {
    std::string rho, sigma;
    double eps = 0.5;
};

int cmd_oneshot(const OneshotConfig& cfg, const Output& out) {
    Matrix rho = parse_operator(cfg.rho), sigma = parse_operator(cfg.sigma);
    if (rho.rows() != sigma.rows()) throw UsageError("oneshot: rho and sigma differ in dimension");
    HypothesisTestResult h = hypothesis_divergence(rho, sigma, cfg.eps);
    Cell smooth;
    if (cfg.eps < 1.0) {
        try {
            smooth = smooth_max_divergence_classical(rho, sigma, cfg.eps);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotApplicable) throw;
        }
    }
    Table t{{"epsilon", "dh_bits", "primal", "dual", "duality_gap", "dmax_bits", "dmax_smooth_bits", "relative_entropy_bits"},
            {}};
    t.add({cfg.eps, h.value_bits, h.primal, h.dual, h.duality_gap, max_divergence(rho, sigma), smooth,
           relative_entropy(rho, sigma)});
    out.emit(t, "oneshot");
    return 0;
}

struct AepConfig {
    std::string rho, sigma;
    double eps = 0.5;
    std::string ns = "100,1000,10000";
};

int cmd_aep(const AepConfig& cfg, const Output& out) {
    Matrix rho = parse_operator(cfg.rho), sigma = parse_operator(cfg.sigma);
    if (rho.rows() != sigma.rows()) throw UsageError("aep: rho and sigma differ in dimension");
    Table t{{"n", "value_bits", "d_limit", "epsilon"}, {}};
    for (const auto& r : aep_trace(rho, sigma, cfg.eps, parse_ints(cfg.ns, "--n")))
        t.add({static_cast<long long>(r.n), r.value_bits, r.d_limit, r.epsilon});
    out.emit(t, "aep");
    return 0;
}

struct TypicalConfig {
    std::string rho;
    std::string ns = "100";
    double delta = 0.1;
};

int cmd_typical(const TypicalConfig& cfg, const Output& out) {
    Matrix rho = parse_operator(cfg.rho);
    if (!(cfg.delta > 0.0)) throw UsageError("--delta must be positive");
    Table t{{"n", "delta", "mass", "complement_log2"}, {}};
    for (const auto& r : typical_table(rho, parse_ints(cfg.ns, "--n"), cfg.delta))
        t.add({static_cast<long long>(r.n), r.delta, r.mass, r.complement_log2});
    out.emit(t, "typical");
    return 0;
}

struct DefinettiConfig {
    int d = 2;
    int n = 2;
    int trials = 100;
    std::uint64_t seed = 0;
    bool mixed = false;
    bool entangled = false;
};

int cmd_definetti(const DefinettiConfig& cfg, const Output& out) {
    if (cfg.d < 1 || cfg.n < 1 || cfg.trials < 1) throw UsageError("--d, --n and --trials must be positive");
    if (cfg.n > 4) throw UsageError("--n: at most 4");
    Matrix sigma = random_density(cfg.d, cfg.d, Rng(cfg.seed).split(0xD), SystemDims({cfg.d})).matrix;
    WitnessReport rep = cfg.mixed ? mixed_extension_witness(sigma, cfg.n, cfg.seed, cfg.trials, cfg.entangled)
                                  : definetti_witness(sigma, cfg.n, cfg.seed, cfg.trials, cfg.entangled);
    Table t{{"trial", "min_eigenvalue", "bound_constant", "n", "d"}, {}};
    bool violated = false;
    for (const auto& w : rep.trials) {
        if (w.min_eigenvalue < -1e-8) violated = true;
        t.add({static_cast<long long>(w.trial), w.min_eigenvalue, w.bound_constant, static_cast<long long>(w.n),
               static_cast<long long>(w.d)});
    }
    out.emit(t, "definetti");
    return violated ? 1 : 0;
}

struct SquashedConfig {
    int k = 3;
    int trials = 50;
    std::uint64_t seed = 0;
    std::string budget = "20,500";
};

int cmd_squashed(const SquashedConfig& cfg, const Output& out) {
    if (cfg.k < 1 || cfg.trials < 1) throw UsageError("--k and --trials must be positive");
    if (cfg.k > 6) throw UsageError("--k: at most 6");
    Budget b = parse_budget(cfg.budget);
    Table t{{"seed", "k", "cmi_bits", "delta", "ladder_max_step", "final_distance", "bound", "holds"}, {}};
    bool violated = false;
    for (int i = 0; i < cfg.trials; ++i) {
        SquashedRow r = squashed_trial(cfg.seed + static_cast<std::uint64_t>(i), cfg.k, b.restarts, b.iterations);
        if (!r.holds) violated = true;
        t.add({static_cast<long long>(r.seed), static_cast<long long>(r.k), r.cmi_bits, r.delta, r.ladder_max_step,
               r.final_distance, r.bound, r.holds});
    }
    out.emit(t, "squashed");
    return violated ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"markov-recovery verification tool"};
    app.require_subcommand(1);
    std::function<int()> run;

    Output o_cmi, o_fr, o_os, o_aep, o_typ, o_df, o_sq;

    std::string state_file;
    auto* c_cmi = app.add_subcommand("cmi", "Entropies and I(A:C|B) of a state file");
    c_cmi->add_option("state", state_file, "State file")->required();
    add_output(c_cmi, o_cmi);
    c_cmi->callback([&] { run = [&] { return cmd_cmi(state_file, o_cmi); }; });

    VerifyConfig vf;
    auto* c_fr = app.add_subcommand("verify-fr", "Fidelity-of-recovery campaign on random tripartite states");
    c_fr->add_option("--trials", vf.trials, "Number of states");
    c_fr->add_option("--dims", vf.dims, "dA,dB,dC");
    c_fr->add_option("--seed", vf.seed, "Seed")->required();
    c_fr->add_option("--budget", vf.budget, "Restarts,iterations");
    c_fr->add_flag("--markov", vf.markov, "Sample quantum Markov chains (qcq reconstructions)");
    add_output(c_fr, o_fr);
    c_fr->callback([&] { run = [&] { return cmd_verify_fr(vf, o_fr); }; });

    OneshotConfig os;
    auto* c_os = app.add_subcommand("oneshot", "D_H^eps with certificate, D_max and classical smooth D_max");
    c_os->add_option("--rho", os.rho, "diag:... or state file")->required();
    c_os->add_option("--sigma", os.sigma, "diag:... or state file")->required();
    c_os->add_option("--eps", os.eps, "Epsilon");
    add_output(c_os, o_os);
    c_os->callback([&] { run = [&] { return cmd_oneshot(os, o_os); }; });

    AepConfig aep;
    auto* c_aep = app.add_subcommand("aep", "D_H^eps of tensor powers divided by n");
    c_aep->add_option("--rho", aep.rho, "diag:... or state file")->required();
    c_aep->add_option("--sigma", aep.sigma, "diag:... or state file")->required();
    c_aep->add_option("--eps", aep.eps, "Epsilon");
    c_aep->add_option("--n", aep.ns, "Comma-separated n values");
    add_output(c_aep, o_aep);
    c_aep->callback([&] { run = [&] { return cmd_aep(aep, o_aep); }; });

    TypicalConfig typ;
    auto* c_typ = app.add_subcommand("typical", "Typical-subspace mass of rho^n");
    c_typ->add_option("--rho", typ.rho, "diag:... or state file")->required();
    c_typ->add_option("--n", typ.ns, "Comma-separated n values");
    c_typ->add_option("--delta", typ.delta, "Window half-width delta");
    add_output(c_typ, o_typ);
    c_typ->callback([&] { run = [&] { return cmd_typical(typ, o_typ); }; });

    DefinettiConfig df;
    auto* c_df = app.add_subcommand("definetti", "Operator-inequality witnesses for the de Finetti reduction");
    c_df->add_option("--d", df.d, "Local dimension");
    c_df->add_option("--n", df.n, "Number of copies");
    c_df->add_option("--trials", df.trials, "Number of witnesses");
    c_df->add_option("--seed", df.seed, "Seed")->required();
    c_df->add_flag("--mixed", df.mixed, "Mixed extensions (purifying factor traced out)");
    c_df->add_flag("--entangled", df.entangled, "Non-product permutation-invariant purifications");
    add_output(c_df, o_df);
    c_df->callback([&] { run = [&] { return cmd_definetti(df, o_df); }; });

    SquashedConfig sq;
    auto* c_sq = app.add_subcommand("squashed", "Extension ladders and the k-extendibility distance bound");
    c_sq->add_option("--k", sq.k, "Number of C copies");
    c_sq->add_option("--trials", sq.trials, "Number of states");
    c_sq->add_option("--seed", sq.seed, "Seed")->required();
    c_sq->add_option("--budget", sq.budget, "Restarts,iterations");
    add_output(c_sq, o_sq);
    c_sq->callback([&] { run = [&] { return cmd_squashed(sq, o_sq); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return run();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
