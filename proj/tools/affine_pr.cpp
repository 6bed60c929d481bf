// Command-line front end: build, measure, recover, verify, collide, certify, experiment.
// Exit codes: 0 success, 1 domain failure, 2 usage or I/O error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affine_pr/affine_pr.hpp"

namespace {

using namespace affine_pr;

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

/// Usage and I/O problems detected after argument parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("AFFINE_PR_SEED");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != std::string(s).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw UsageError("AFFINE_PR_SEED is not a non-negative integer: " + std::string(s));
    }
}

/// Explicit flag, then AFFINE_PR_SEED.
std::optional<std::uint64_t> resolve_seed(const std::optional<std::uint64_t>& flag) { return flag ? flag : env_seed(); }

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

FieldTag parse_field(const std::string& s) { return s == "complex" ? FieldTag::Complex : FieldTag::Real; }

Ensemble load_ensemble(const std::string& path) {
    Ensemble e = ensemble_from_json(read_json_file(path));
    const ValidationReport rep = validate_ensemble(e);
    if (!rep.valid()) {
        std::string msg = path + ": invalid ensemble";
        for (const auto& p : rep.problems) msg += "\n  " + p;
        throw UsageError(msg);
    }
    return e;
}

struct Args {
    std::string field = "real";
    std::size_t dim = 0;
    std::size_t rank = 1;
    std::string kind = "tight";
    std::size_t m = 0;
    std::optional<std::uint64_t> seed;
    double delta = 1e-3;
    std::string out;
    std::string witness_out;
    std::string ensemble;
    std::string signal;
    std::string measurements;
    std::string method = "auto";
    int restarts = -1;
    int max_iter = -1;
    double tol = -1.0;
    std::string expect;
    std::string witness;
    std::string certificate;
    std::string experiment;
    std::string config;
    std::vector<std::string> fields;
    std::vector<std::size_t> d_grid;
    std::vector<std::size_t> r_grid;
    std::vector<std::size_t> m_grid;
    std::vector<double> deltas;
    int trials = -1;
    bool control = false;
    std::string format;
};

int cmd_build(const Args& a) {
    const FieldTag f = parse_field(a.field);
    if (a.kind == "tight") {
        emit(a.out, serialize_ensemble(tight_ensemble(a.dim, a.rank, f)));
    } else if (a.kind == "random") {
        if (a.m == 0) throw UsageError("--kind random needs --m");
        emit(a.out, serialize_ensemble(random_ensemble(a.dim, a.rank, a.m, f, resolve_seed(a.seed).value_or(0))));
    } else {
        const PerturbationWitness pw = perturbed_ensemble(a.dim, a.rank, f, a.delta);
        emit(a.out, serialize_ensemble(pw.perturbed));
        if (!a.witness_out.empty())
            write_text_file(a.witness_out, dump_json(witness_json(make_witness(pw.perturbed, pw.x, pw.y))));
    }
    return kOk;
}

int cmd_measure(const Args& a) {
    const Ensemble e = load_ensemble(a.ensemble);
    const Signal x = signal_from_json(read_json_file(a.signal));
    if (x.field != e.field) throw UsageError("signal field does not match the ensemble");
    emit(a.out, dump_json(measurements_json(measure(e, x))));
    return kOk;
}

int cmd_recover(const Args& a) {
    const Ensemble e = load_ensemble(a.ensemble);
    const MeasurementVector y = measurements_from_json(read_json_file(a.measurements));
    const bool tight_meta = e.meta && e.meta->kind == ConstructionKind::Tight;
    const std::string method = a.method == "auto" ? (tight_meta ? "tight" : "lsq") : a.method;
    if (method == "tight") {
        const TightRecovery rec = tight_recover(e, y);
        emit(a.out, dump_json(signal_json(rec.x)));
        if (!rec.consistent()) {
            std::cerr << "measurements are not consistent with any signal (block residual " << rec.max_residual()
                      << ")\n";
            return kDomainFailure;
        }
        return kOk;
    }
    LsqOptions opts;
    if (a.restarts > 0) opts.restarts = a.restarts;
    if (a.max_iter > 0) opts.max_iter = a.max_iter;
    if (a.tol > 0) opts.tol = a.tol;
    opts.seed = resolve_seed(a.seed).value_or(0);
    const RecoveryReport rep = lsq_recover(e, y, opts);
    emit(a.out, dump_json(signal_json(rep.x)));
    if (!rep.success) {
        std::cerr << "least-squares recovery did not reach the tolerance (residual " << rep.residual << ")\n";
        return kDomainFailure;
    }
    return kOk;
}

ReportOptions report_options(const Args& a) {
    ReportOptions opts;
    if (a.restarts > 0) opts.search.restarts = a.restarts;
    if (a.max_iter > 0) opts.search.max_iter = a.max_iter;
    if (a.tol > 0) opts.search.tol = a.tol;
    opts.search.seed = resolve_seed(a.seed).value_or(0);
    opts.deficiency.seed = opts.search.seed;
    return opts;
}

int cmd_verify(const Args& a) {
    const Ensemble e = load_ensemble(a.ensemble);
    const InjectivityReport rep = injectivity_report(e, report_options(a));
    emit(a.out, dump_json(report_json(rep)));
    if (a.expect == "injective" && rep.verdict == Verdict::NonInjective) return kDomainFailure;
    if (a.expect == "non-injective" && rep.verdict != Verdict::NonInjective) return kDomainFailure;
    return kOk;
}

int cmd_collide(const Args& a) {
    const Ensemble e = load_ensemble(a.ensemble);
    const InjectivityReport rep = injectivity_report(e, report_options(a));
    if (!rep.witness) {
        std::cerr << "no collision found after " << rep.restarts_used << " restarts (smallest relative margin "
                  << rep.min_margin_relative << ")\n";
        return kDomainFailure;
    }
    emit(a.out, dump_json(witness_json(*rep.witness)));
    return kOk;
}

int cmd_certify(const Args& a) {
    const Ensemble e = load_ensemble(a.ensemble);
    if (a.witness.empty() == a.certificate.empty()) throw UsageError("certify needs exactly one of --witness, --certificate");
    if (!a.witness.empty()) {
        const CollisionWitness w = witness_from_json(read_json_file(a.witness), e);
        const Certificate c = certificate_from_collision(w, e);
        const CertificateReport rep = verify_certificate(e, c);
        json out = certificate_json(c);
        out["report"] = certificate_report_json(rep);
        emit(a.out, dump_json(out));
        return rep.all_pass() ? kOk : kDomainFailure;
    }
    const Certificate c = certificate_from_json(read_json_file(a.certificate));
    const CertificateReport rep = verify_certificate(e, c);
    json out{{"report", certificate_report_json(rep)}};
    int code = kOk;
    try {
        out["witness"] = witness_json(collision_from_certificate(c, e));
    } catch (const CertificateInvalidError& err) {
        out["error"] = err.what();
        code = kDomainFailure;
    }
    emit(a.out, dump_json(out));
    return code;
}

int cmd_experiment(const Args& a) {
    ExperimentConfig cfg;
    if (!a.config.empty()) cfg = config_from_json(read_json_file(a.config));
    if (!a.experiment.empty()) cfg.experiment = a.experiment;
    if (!a.fields.empty()) {
        cfg.fields.clear();
        for (const auto& f : a.fields) cfg.fields.push_back(parse_field(f));
    }
    if (!a.d_grid.empty()) cfg.d_grid = a.d_grid;
    if (!a.r_grid.empty()) cfg.r_grid = a.r_grid;
    if (!a.m_grid.empty()) cfg.m_grid = a.m_grid;
    if (!a.deltas.empty()) cfg.deltas = a.deltas;
    if (a.trials > 0) cfg.trials = a.trials;
    if (a.restarts > 0) cfg.restarts = a.restarts;
    if (a.control) cfg.control = true;
    if (!a.format.empty()) cfg.format = a.format;
    if (!a.out.empty()) cfg.output = a.out;
    if (a.seed)
        cfg.seed = a.seed;
    else if (!cfg.seed)
        cfg.seed = env_seed();
    const std::vector<ExperimentRow> rows = run_experiment(cfg);
    emit(cfg.output, cfg.format == "json" ? dump_json(rows_to_json(cfg, rows)) : rows_to_csv(rows));
    return all_passed(rows) ? kOk : kDomainFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affine phase retrieval: build ensembles, recover signals, test injectivity"};
    app.require_subcommand(1);
    Args a;

    const std::vector<std::string> field_names{"real", "complex"};
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out,-o", a.out, "Output file (stdout if omitted)"); };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", a.seed, "Master seed (falls back to AFFINE_PR_SEED)");
    };
    auto add_search = [&](CLI::App* sub) {
        sub->add_option("--restarts", a.restarts, "Multistart count")->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", a.max_iter, "Iterations per restart")->check(CLI::PositiveNumber);
        sub->add_option("--tol", a.tol, "Witness or residual tolerance")->check(CLI::PositiveNumber);
        add_seed(sub);
    };

    auto* build = app.add_subcommand("build", "Write a tight, random or perturbed ensemble");
    build->add_option("--field", a.field)->check(CLI::IsMember(field_names));
    build->add_option("--dim,-d", a.dim, "Signal dimension d")->required()->check(CLI::PositiveNumber);
    build->add_option("--rank,-r", a.rank, "Columns r of each M_j")->check(CLI::PositiveNumber);
    build->add_option("--kind", a.kind)->check(CLI::IsMember({"tight", "random", "perturbed"}));
    build->add_option("--m", a.m, "Measurement count (random)");
    build->add_option("--delta", a.delta, "Perturbation size (perturbed)");
    build->add_option("--witness-out", a.witness_out, "Also write the collision (perturbed)");
    add_seed(build);
    add_out(build);

    auto* meas = app.add_subcommand("measure", "Evaluate the measurement map");
    meas->add_option("--ensemble,-e", a.ensemble)->required();
    meas->add_option("--signal,-x", a.signal)->required();
    add_out(meas);

    auto* rec = app.add_subcommand("recover", "Recover a signal from measurements");
    rec->add_option("--ensemble,-e", a.ensemble)->required();
    rec->add_option("--measurements,-y", a.measurements)->required();
    rec->add_option("--method", a.method)->check(CLI::IsMember({"auto", "tight", "lsq"}));
    add_search(rec);
    add_out(rec);

    auto* ver = app.add_subcommand("verify", "Injectivity report for an ensemble");
    ver->add_option("--ensemble,-e", a.ensemble)->required();
    ver->add_option("--expect", a.expect, "Exit 1 unless the verdict matches")
        ->check(CLI::IsMember({"injective", "non-injective"}));
    add_search(ver);
    add_out(ver);

    auto* col = app.add_subcommand("collide", "Find a colliding pair");
    col->add_option("--ensemble,-e", a.ensemble)->required();
    add_search(col);
    add_out(col);

    auto* cert = app.add_subcommand("certify", "Witness to certificate, or certificate to witness");
    cert->add_option("--ensemble,-e", a.ensemble)->required();
    cert->add_option("--witness,-w", a.witness);
    cert->add_option("--certificate,-c", a.certificate);
    add_out(cert);

    auto* exp = app.add_subcommand("experiment", "Run a batch experiment and write CSV or JSON rows");
    exp->add_option("name", a.experiment)->check(CLI::IsMember({"tightness", "generic", "openness"}));
    exp->add_option("--config", a.config, "JSON config; flags override it");
    exp->add_option("--field", a.fields)->check(CLI::IsMember(field_names));
    exp->add_option("--d", a.d_grid)->delimiter(',');
    exp->add_option("--r", a.r_grid)->delimiter(',');
    exp->add_option("--m", a.m_grid)->delimiter(',');
    exp->add_option("--deltas", a.deltas)->delimiter(',');
    exp->add_option("--trials", a.trials)->check(CLI::PositiveNumber);
    exp->add_option("--restarts", a.restarts)->check(CLI::PositiveNumber);
    exp->add_flag("--control", a.control, "Add below-bound control cells (generic)");
    exp->add_option("--format", a.format)->check(CLI::IsMember({"csv", "json"}));
    add_seed(exp);
    add_out(exp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        std::cerr << app.help();
        return kUsageError;
    }

    try {
        if (*build) return cmd_build(a);
        if (*meas) return cmd_measure(a);
        if (*rec) return cmd_recover(a);
        if (*ver) return cmd_verify(a);
        if (*col) return cmd_collide(a);
        if (*cert) return cmd_certify(a);
        if (*exp) return cmd_experiment(a);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const SchemaVersionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainFailure;
    }
    return kUsageError;
}
