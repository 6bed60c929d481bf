#pragma once

// Batch experiments over grids of (field, d, r, m): tight counts and recovery,
// generic injectivity of random ensembles, and perturbations of tight ensembles.
// Every random draw comes from mix_seed(seed, cell, trial), so rows depend only on
// the configuration and never on scheduling.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "affine_pr/constructions.hpp"
#include "affine_pr/ensemble.hpp"
#include "affine_pr/errors.hpp"
#include "affine_pr/forward_map.hpp"
#include "affine_pr/injectivity.hpp"
#include "affine_pr/recovery.hpp"
#include "affine_pr/rng.hpp"
#include "affine_pr/serialization.hpp"

namespace affine_pr {

struct ExperimentConfig {
    std::string experiment;  // tightness | generic | openness
    std::vector<FieldTag> fields{FieldTag::Real};
    std::vector<std::size_t> d_grid;
    std::vector<std::size_t> r_grid;  // empty: 1..d (tightness), {1} otherwise
    std::vector<std::size_t> m_grid;  // generic only; empty: 2d (real) / 4d-1 (complex)
    std::vector<double> deltas{1e-1, 1e-3, 1e-6};
    int trials = 20;
    int restarts = 50;
    std::optional<std::uint64_t> seed;
    bool control = false;  // generic: add cells with m one below the minimal count
    double recovery_tol = 1e-8;
    double witness_tol = 1e-10;
    std::string output;
    std::string format = "csv";
};

inline void validate_config(const ExperimentConfig& c) {
    if (c.experiment != "tightness" && c.experiment != "generic" && c.experiment != "openness")
        throw ConfigError("unknown experiment \"" + c.experiment + "\"");
    if (!c.seed) throw ConfigError("experiments need an explicit seed");
    if (c.fields.empty()) throw ConfigError("field list is empty");
    if (c.d_grid.empty()) throw ConfigError("d grid is empty");
    if (std::any_of(c.d_grid.begin(), c.d_grid.end(), [](std::size_t d) { return d < 1; }))
        throw ConfigError("d values must be >= 1");
    if (std::any_of(c.r_grid.begin(), c.r_grid.end(), [](std::size_t r) { return r < 1; }))
        throw ConfigError("r values must be >= 1");
    if (c.trials < 1) throw ConfigError("trials must be >= 1");
    if (c.restarts < 1) throw ConfigError("restarts must be >= 1");
    if (c.experiment == "openness") {
        if (c.deltas.empty()) throw ConfigError("delta list is empty");
        for (double dl : c.deltas)
            if (!(dl > 0.0) || !std::isfinite(dl)) throw ConfigError("delta values must be positive and finite");
        for (std::size_t d : c.d_grid)
            if (d < 2) throw ConfigError("openness needs d >= 2");
    }
    if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
}

/// One unit of work. `trial` indexes the row within its cell; `value` is the
/// quantity compared against the check's threshold.
struct ExperimentRow {
    std::string experiment;
    std::size_t cell = 0;
    std::size_t trial = 0;
    FieldTag field = FieldTag::Real;
    std::size_t d = 0;
    std::size_t r = 0;
    std::size_t m = 0;
    std::size_t bound = 0;
    std::string check;
    std::string verdict;
    double value = 0.0;
    bool passed = false;
    double wall_time_ms = 0.0;
    std::string witness;  // single-line witness JSON, NonInjective rows only
};

namespace detail {

struct RowTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
};

inline std::vector<std::size_t> r_values(const ExperimentConfig& c, std::size_t d, bool all_by_default) {
    std::vector<std::size_t> out;
    if (c.r_grid.empty()) {
        if (!all_by_default) return {1};
        for (std::size_t r = 1; r <= d; ++r) out.push_back(r);
        return out;
    }
    for (std::size_t r : c.r_grid)
        if (r <= d) out.push_back(r);
    return out;
}

inline void sort_rows(std::vector<ExperimentRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
        return a.cell != b.cell ? a.cell < b.cell : a.trial < b.trial;
    });
}

inline Ensemble drop_pair(const Ensemble& e, std::size_t j) {
    Ensemble out = e;
    out.pairs.erase(out.pairs.begin() + static_cast<std::ptrdiff_t>(j));
    out.meta.reset();
    return out;
}

}  // namespace detail

/// Per (field, d, r) cell: the count row, `trials` recovery round trips, and, when r | d,
/// one deficiency collision per leave-one-out sub-ensemble.
inline std::vector<ExperimentRow> run_tightness_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<ExperimentRow> rows;
    std::size_t cell = 0;
    for (FieldTag field : cfg.fields)
        for (std::size_t d : cfg.d_grid)
            for (std::size_t r : detail::r_values(cfg, d, true)) {
                detail::RowTimer build_timer;
                const Ensemble e = tight_ensemble(d, r, field);
                const std::size_t bound = tight_count(field, d, r);
                ExperimentRow base{"tightness", cell, 0, field, d, r, e.m(), bound};
                std::size_t trial = 0;

                ExperimentRow count = base;
                count.trial = trial++;
                count.check = "count";
                count.value = static_cast<double>(e.m());
                count.passed = e.m() == bound;
                count.verdict = count.passed ? "match" : "mismatch";
                count.wall_time_ms = build_timer.ms();
                rows.push_back(count);

                for (int t = 0; t < cfg.trials; ++t) {
                    detail::RowTimer timer;
                    Rng rng(mix_seed(*cfg.seed, cell, static_cast<std::uint64_t>(t)));
                    const Signal x = random_signal(d, field, rng);
                    ExperimentRow row = base;
                    row.trial = trial++;
                    row.check = "recovery";
                    const TightRecovery rec = tight_recover(e, measure(e, x));
                    row.value = norm(rec.x - x) / (1.0 + norm(x));
                    row.passed = row.value <= cfg.recovery_tol && rec.consistent();
                    row.verdict = row.passed ? "recovered" : "failed";
                    row.wall_time_ms = timer.ms();
                    rows.push_back(row);
                }

                if (d % r == 0) {
                    for (std::size_t j = 0; j < e.m(); ++j) {
                        detail::RowTimer timer;
                        const Ensemble sub = detail::drop_pair(e, j);
                        ExperimentRow row = base;
                        row.trial = trial++;
                        row.m = sub.m();
                        row.check = "leave_one_out";
                        try {
                            DeficiencyOptions dopts;
                            dopts.seed = mix_seed(*cfg.seed, cell, j);
                            const CollisionWitness w = deficiency_collision(sub, dopts);
                            row.value = w.gap / w.scale;
                            row.passed = w.valid(1e-8) && w.separation >= 1e-4;
                            row.verdict = row.passed ? "non-injective" : "invalid-witness";
                            row.witness = dump_json(witness_json(w), -1);
                        } catch (const SubsetSearchError& err) {
                            row.verdict = err.kind() == SubsetSearchError::Kind::BudgetExhausted ? "budget-exhausted"
                                                                                                 : "infeasible";
                            row.value = std::nan("");
                        }
                        row.wall_time_ms = timer.ms();
                        rows.push_back(row);
                    }
                }
                ++cell;
            }
    detail::sort_rows(rows);
    return rows;
}

/// Per (field, d, r, m) cell: `trials` random ensembles through injectivity_report, then a
/// summary row whose value is the number of NonInjective verdicts. Cells with m at least the
/// generic count (2d real, 4d-1 complex) expect no collision; cells below the minimal count
/// expect one; anything in between is recorded without an expectation.
inline std::vector<ExperimentRow> run_generic_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    struct Cell {
        FieldTag field;
        std::size_t d, r, m;
    };
    std::vector<Cell> cells;
    for (FieldTag field : cfg.fields)
        for (std::size_t d : cfg.d_grid)
            for (std::size_t r : detail::r_values(cfg, d, false)) {
                if (cfg.m_grid.empty())
                    cells.push_back({field, d, r, field == FieldTag::Real ? 2 * d : 4 * d - 1});
                else
                    for (std::size_t m : cfg.m_grid) cells.push_back({field, d, r, m});
                if (cfg.control && minimal_count(field, d, r) > 1)
                    cells.push_back({field, d, r, minimal_count(field, d, r) - 1});
            }

    std::vector<ExperimentRow> rows;
    for (std::size_t cell = 0; cell < cells.size(); ++cell) {
        const Cell& c = cells[cell];
        const std::size_t bound = minimal_count(c.field, c.d, c.r);
        const std::size_t generic = c.field == FieldTag::Real ? 2 * c.d : 4 * c.d - 1;
        const std::string check = c.m < bound ? "control" : c.m >= generic ? "generic" : "explore";
        ExperimentRow base{"generic", cell, 0, c.field, c.d, c.r, c.m, bound, check};
        int collisions = 0;
        bool all_passed = true;
        double summary_ms = 0.0;
        for (int t = 0; t < cfg.trials; ++t) {
            detail::RowTimer timer;
            const std::uint64_t trial_seed = mix_seed(*cfg.seed, cell, static_cast<std::uint64_t>(t));
            const Ensemble e = random_ensemble(c.d, c.r, c.m, c.field, trial_seed);
            ReportOptions opts;
            opts.search.restarts = cfg.restarts;
            opts.search.tol = cfg.witness_tol;
            opts.search.seed = splitmix64(trial_seed);
            opts.deficiency.seed = splitmix64(trial_seed);
            const InjectivityReport rep = injectivity_report(e, opts);
            ExperimentRow row = base;
            row.trial = static_cast<std::size_t>(t);
            row.verdict = to_string(rep.verdict);
            const bool hit = rep.verdict == Verdict::NonInjective;
            collisions += hit ? 1 : 0;
            row.value = hit ? rep.witness->gap / rep.witness->scale : rep.min_margin_relative;
            row.passed = check == "control" ? hit : check == "generic" ? !hit : true;
            if (rep.witness) row.witness = dump_json(witness_json(*rep.witness), -1);
            row.wall_time_ms = timer.ms();
            summary_ms += row.wall_time_ms;
            all_passed = all_passed && row.passed;
            rows.push_back(row);
        }
        ExperimentRow summary = base;
        summary.trial = static_cast<std::size_t>(cfg.trials);
        summary.check = check + "_summary";
        summary.value = collisions;
        summary.verdict = std::to_string(collisions) + "/" + std::to_string(cfg.trials) + " non-injective";
        summary.passed = all_passed;
        summary.wall_time_ms = summary_ms;
        rows.push_back(summary);
    }
    detail::sort_rows(rows);
    return rows;
}

/// Per (field, d, r, delta) cell: the perturbed ensemble's distance to the tight one, the
/// witness gap and separation, and how far apart the unperturbed ensemble keeps the pair.
inline std::vector<ExperimentRow> run_openness_demo(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<ExperimentRow> rows;
    std::size_t cell = 0;
    for (FieldTag field : cfg.fields)
        for (std::size_t d : cfg.d_grid)
            for (std::size_t r : detail::r_values(cfg, d, false))
                for (double delta : cfg.deltas) {
                    detail::RowTimer timer;
                    const PerturbationWitness pw = perturbed_ensemble(d, r, field, delta);
                    const CollisionWitness w = make_witness(pw.perturbed, pw.x, pw.y);
                    const CollisionWitness base_w = make_witness(pw.base, pw.x, pw.y);
                    const double dist = frobenius_norm(pw.perturbed.pairs.front().M - pw.base.pairs.front().M);
                    const double b11 = std::abs(pw.base.pairs.front().b[0]);
                    const double ms = timer.ms();
                    const std::string witness = dump_json(witness_json(w), -1);
                    ExperimentRow base{"openness", cell, 0, field, d, r, pw.perturbed.m(), minimal_count(field, d, r)};
                    auto add = [&](const char* check, double value, bool passed) {
                        ExperimentRow row = base;
                        row.check = check;
                        row.value = value;
                        row.passed = passed;
                        row.verdict = passed ? "pass" : "fail";
                        row.wall_time_ms = ms;
                        rows.push_back(row);
                    };
                    const std::size_t first = rows.size();
                    add("frobenius_distance", dist, dist <= std::sqrt(2.0) * delta * std::max(1.0, b11) * (1 + 1e-12));
                    add("witness_gap", w.gap / w.scale, w.gap <= cfg.witness_tol * w.scale);
                    add("separation", w.separation, w.separation >= 1.0);
                    add("base_separates", base_w.gap / base_w.scale, base_w.gap > 1e-6 * base_w.scale);
                    for (std::size_t k = first; k < rows.size(); ++k) rows[k].trial = k - first;
                    rows[first + 1].witness = witness;
                    rows[first + 1].verdict = rows[first + 1].passed ? "non-injective" : "invalid-witness";
                    ++cell;
                }
    detail::sort_rows(rows);
    return rows;
}

inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (cfg.experiment == "tightness") return run_tightness_experiment(cfg);
    if (cfg.experiment == "generic") return run_generic_experiment(cfg);
    return run_openness_demo(cfg);
}

// ---------------------------------------------------------------------------
// Output

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{"experiment", "cell",  "trial",   "field",  "d",
                                               "r",          "m",     "bound",   "check",  "verdict",
                                               "value",      "passed", "wall_time_ms", "witness"};
    return cols;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

/// Header plus one line per row. `with_time = false` drops the wall-time values, which is
/// what determinism comparisons use.
inline std::string rows_to_csv(const std::vector<ExperimentRow>& rows, bool with_time = true) {
    std::string out;
    const auto& cols = csv_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? "," : "") + cols[k];
    out += '\n';
    for (const auto& r : rows) {
        out += r.experiment + ',' + std::to_string(r.cell) + ',' + std::to_string(r.trial) + ',' + to_string(r.field) +
               ',' + std::to_string(r.d) + ',' + std::to_string(r.r) + ',' + std::to_string(r.m) + ',' +
               std::to_string(r.bound) + ',' + r.check + ',' + csv_quote(r.verdict) + ',' + csv_number(r.value) + ',' +
               (r.passed ? "true" : "false") + ',' + (with_time ? csv_number(r.wall_time_ms) : std::string()) + ',' +
               csv_quote(r.witness) + '\n';
    }
    return out;
}

inline json rows_to_json(const ExperimentConfig& cfg, const std::vector<ExperimentRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json j{{"experiment", r.experiment}, {"cell", r.cell},       {"trial", r.trial},   {"field", to_string(r.field)},
               {"d", r.d},                   {"r", r.r},             {"m", r.m},           {"bound", r.bound},
               {"check", r.check},           {"verdict", r.verdict}, {"passed", r.passed}, {"wall_time_ms", r.wall_time_ms}};
        j["value"] = std::isfinite(r.value) ? json(r.value) : json(nullptr);
        if (!r.witness.empty()) j["witness"] = json::parse(r.witness);
        arr.push_back(std::move(j));
    }
    return {{"schema", "affine-pr-experiment-1"},
            {"experiment", cfg.experiment},
            {"seed", cfg.seed ? *cfg.seed : 0},
            {"rows", std::move(arr)}};
}

inline bool all_passed(const std::vector<ExperimentRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const ExperimentRow& r) { return r.passed; });
}

// ---------------------------------------------------------------------------
// Config files

namespace detail {

template <class T>
std::vector<T> list_of(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError("\"" + key + "\" must be an array");
    std::vector<T> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError("\"" + key + "\" entries must be numbers");
        if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw ConfigError("\"" + key + "\" entries must be non-negative integers");
        }
        out.push_back(v.get<T>());
    }
    return out;
}

inline ExperimentConfig read_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known{"experiment", "fields", "field",   "d",       "r",
                                                "m",          "deltas", "trials",  "restarts", "seed",
                                                "control",    "tolerances", "output", "format"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key \"" + it.key() + "\"");
    ExperimentConfig c;
    auto field_of = [](const json& v) {
        if (v == "real") return FieldTag::Real;
        if (v == "complex") return FieldTag::Complex;
        throw ConfigError("field must be \"real\" or \"complex\"");
    };
    if (auto it = j.find("experiment"); it != j.end()) c.experiment = it->get<std::string>();
    if (auto it = j.find("field"); it != j.end()) c.fields = {field_of(*it)};
    if (auto it = j.find("fields"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("\"fields\" must be an array");
        c.fields.clear();
        for (const auto& v : *it) c.fields.push_back(field_of(v));
    }
    if (auto it = j.find("d"); it != j.end()) c.d_grid = detail::list_of<std::size_t>(*it, "d");
    if (auto it = j.find("r"); it != j.end()) c.r_grid = detail::list_of<std::size_t>(*it, "r");
    if (auto it = j.find("m"); it != j.end()) c.m_grid = detail::list_of<std::size_t>(*it, "m");
    if (auto it = j.find("deltas"); it != j.end()) c.deltas = detail::list_of<double>(*it, "deltas");
    if (auto it = j.find("trials"); it != j.end()) c.trials = it->get<int>();
    if (auto it = j.find("restarts"); it != j.end()) c.restarts = it->get<int>();
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        c.seed = it->get<std::uint64_t>();
    }
    if (auto it = j.find("control"); it != j.end()) c.control = it->get<bool>();
    if (auto it = j.find("tolerances"); it != j.end()) {
        if (auto t = it->find("recovery"); t != it->end()) c.recovery_tol = t->get<double>();
        if (auto t = it->find("witness"); t != it->end()) c.witness_tol = t->get<double>();
    }
    if (auto it = j.find("output"); it != j.end()) c.output = it->get<std::string>();
    if (auto it = j.find("format"); it != j.end()) c.format = it->get<std::string>();
    return c;
}

}  // namespace detail

/// Keys: experiment, fields (or field), d, r, m, deltas, trials, restarts, seed, control,
/// tolerances {recovery, witness}, output, format. Unknown keys are rejected.
inline ExperimentConfig config_from_json(const json& j) {
    try {
        return detail::read_config(j);
    } catch (const json::exception& err) {
        throw ConfigError(std::string("config value has the wrong type: ") + err.what());
    }
}

}  // namespace affine_pr
