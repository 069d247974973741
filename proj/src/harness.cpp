#include "kernelcal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "kernelcal/bloomsim.hpp"
#include "kernelcal/errors.hpp"
#include "kernelcal/fixedpoints.hpp"
#include "kernelcal/json_io.hpp"
#include "kernelcal/pathengine.hpp"
#include "kernelcal/thermo.hpp"

#ifndef KERNELCAL_VERSION
#define KERNELCAL_VERSION "dev"
#endif

namespace fs = std::filesystem;

namespace kernelcal::harness {

using nlohmann::json;

void SeedRange::validate() const {
    if (hi < lo) throw SchemaError("seeds", "range must satisfy lo <= hi");
    if (count() > 1000000) throw SchemaError("seeds", "range too large");
}

SeedRange parse_seed_range(const std::string& text) {
    SeedRange r;
    const auto sep = text.find("..");
    try {
        if (sep == std::string::npos) {
            r.lo = r.hi = std::stoull(text);
        } else {
            r.lo = std::stoull(text.substr(0, sep));
            r.hi = std::stoull(text.substr(sep + 2));
        }
    } catch (const std::exception&) {
        throw SchemaError("seeds", "expected 'a' or 'a..b' with integers");
    }
    r.validate();
    return r;
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::toy: return "toy";
        case ExperimentKind::fixedpoints: return "fixedpoints";
        case ExperimentKind::bloom: return "bloom";
        case ExperimentKind::thermo: return "thermo";
    }
    return "toy";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "toy") return ExperimentKind::toy;
    if (s == "fixedpoints") return ExperimentKind::fixedpoints;
    if (s == "bloom") return ExperimentKind::bloom;
    if (s == "thermo") return ExperimentKind::thermo;
    throw SchemaError("kind", "unknown experiment kind: " + s);
}

void ExperimentConfig::validate() const {
    seeds.validate();
    if (parallelism < 1) throw SchemaError("parallelism", "must be >= 1");
    if (output_dir.empty()) throw SchemaError("output_dir", "must be nonempty");
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void prepare_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = fs::path(dir) / ".kernelcal_probe";
    std::ofstream out(probe);
    out << "probe";
    const bool ok = static_cast<bool>(out);
    out.close();
    if (!ok) throw DataError("output directory not writable: " + dir);
    fs::remove(probe, ec);
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw DataError("failed to write " + path);
}

std::string csv_escape(const std::string& s) { return s; }  // fields here never need quoting

// ---- toy ------------------------------------------------------------------

std::vector<std::string> run_toy(const json& payload, const SeedRange& seeds,
                                 const std::string& dir) {
    const io::ToyJob job = io::toy_job_from_json(payload);
    const paths::GibbsPathMeasure gm = paths::transfer_solve(job.spec);
    const double entropy = paths::path_entropy(job.spec);

    std::vector<std::string> files;

    std::ostringstream measure;
    measure << "t,state,marginal\n";
    for (int t = 0; t <= job.spec.T; ++t)
        for (int i = 0; i < job.spec.m; ++i)
            measure << t << "," << i << "," << format_double(gm.node_marginals(t, i)) << "\n";
    write_text_file(dir + "/measure.csv", measure.str());
    files.push_back("measure.csv");

    std::ostringstream pairs;
    pairs << "t,from,to,prob\n";
    for (int t = 0; t < job.spec.T; ++t)
        for (int i = 0; i < job.spec.m; ++i)
            for (int k = 0; k < job.spec.m; ++k)
                pairs << t << "," << i << "," << k << ","
                      << format_double(gm.pair_marginals[t](i, k)) << "\n";
    write_text_file(dir + "/pairs.csv", pairs.str());
    files.push_back("pairs.csv");

    json summary;
    summary["m"] = job.spec.m;
    summary["T"] = job.spec.T;
    summary["lambda_c"] = job.spec.lambda_c;
    summary["lambda_g"] = job.spec.lambda_g;
    summary["ln_z"] = gm.ln_z;
    summary["expected_switch_cost"] = gm.expected_switch_cost;
    summary["expected_info"] = gm.expected_info;
    summary["path_entropy"] = entropy;
    if (job.calibrate) {
        const paths::CalibrationResult cal =
            paths::calibrate_multipliers(job.spec, job.target_switch_cost, job.target_info);
        summary["calibration"] = {
            {"lambda_c", cal.lambda_c},         {"lambda_g", cal.lambda_g},
            {"iterations", cal.iterations},     {"residual_c", cal.residual_c},
            {"residual_g", cal.residual_g},
        };
    }
    write_text_file(dir + "/summary.json", summary.dump(2) + "\n");
    files.push_back("summary.json");

    if (job.samples > 0) {
        const std::vector<paths::Trajectory> trajs =
            paths::sample_paths(job.spec, job.samples, seeds.lo);
        std::ostringstream out;
        for (std::size_t i = 0; i < trajs.size(); ++i) {
            json line;
            line["sample"] = i;
            line["states"] = trajs[i].states;
            out << line.dump() << "\n";
        }
        write_text_file(dir + "/samples.jsonl", out.str());
        files.push_back("samples.jsonl");
    }
    return files;
}

// ---- fixedpoints ----------------------------------------------------------

std::vector<std::string> run_fixedpoints(const json& payload, const std::string& dir) {
    const io::FixedPointsJob job = io::fixedpoints_job_from_json(payload);

    fixedpoints::FindOptions opts;
    fixedpoints::FrozenObjectiveConfig base = job.cfg;
    const fixedpoints::ScanResult scan = [&] {
        fixedpoints::ScanResult s;
        s.cells.reserve(job.lambda_grid.size());
        for (std::size_t c = 0; c < job.lambda_grid.size(); ++c) {
            const auto one = fixedpoints::bifurcation_scan(
                base, {job.lambda_grid[c]}, opts);
            fixedpoints::ScanCell cell = one.cells.front();
            cell.index = static_cast<int>(c);
            s.cells.push_back(std::move(cell));
        }
        return s;
    }();

    std::ostringstream csv;
    csv << "lambda2,lambda3,theta,s_star,stability,min_eig,max_eig\n";
    json cells = json::array();
    bool discreteness_ok = true;
    for (const fixedpoints::ScanCell& cell : scan.cells) {
        json jcell;
        jcell["index"] = cell.index;
        jcell["lambda2"] = cell.lambda2;
        jcell["lambda3"] = cell.lambda3;
        jcell["stable_count"] = cell.stable_count;
        jcell["min_stable_separation"] = cell.min_stable_separation;
        if (!cell.error.empty()) jcell["error"] = cell.error;
        json points = json::array();
        for (const fixedpoints::FixedPointRecord& r : cell.records) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.hessian);
            const double emin = es.eigenvalues().minCoeff();
            const double emax = es.eigenvalues().maxCoeff();
            std::string theta_text;
            for (int i = 0; i < r.theta_star.size(); ++i)
                theta_text += (i ? ";" : "") + format_double(r.theta_star(i));
            csv << format_double(cell.lambda2) << "," << format_double(cell.lambda3) << ","
                << theta_text << "," << format_double(r.s_star) << ","
                << fixedpoints::to_string(r.stability) << "," << format_double(emin) << ","
                << format_double(emax) << "\n";
            json pt;
            pt["theta"] = std::vector<double>(r.theta_star.data(),
                                              r.theta_star.data() + r.theta_star.size());
            pt["s_star"] = r.s_star;
            pt["gradient_norm"] = r.gradient_norm;
            pt["stability"] = fixedpoints::to_string(r.stability);
            pt["eig_min"] = emin;
            pt["eig_max"] = emax;
            points.push_back(pt);
        }
        jcell["points"] = points;
        cells.push_back(jcell);
        if (cell.stable_count >= 2 && cell.min_stable_separation < opts.merge_tol)
            discreteness_ok = false;
    }

    write_text_file(dir + "/fixed_points.csv", csv.str());
    json summary;
    summary["info_model"] = "gaussian_logdet";
    summary["cells"] = cells;
    summary["merge_tol"] = opts.merge_tol;
    summary["grad_tol"] = opts.grad_tol;
    summary["discreteness_ok"] = discreteness_ok;
    write_text_file(dir + "/scan_summary.json", summary.dump(2) + "\n");
    return {"fixed_points.csv", "scan_summary.json"};
}

// ---- bloom ----------------------------------------------------------------

json step_to_json(const bloom::StepRecord& r) {
    json j;
    j["t"] = r.t;
    j["action"] = bloom::to_string(r.action);
    j["asv"] = {r.asv_pos.x(), r.asv_pos.y()};
    j["auv"] = {r.auv_pos.x(), r.auv_pos.y()};
    j["sigma"] = r.sigma == bloom::CoordState::docked ? "docked" : "undocked";
    j["energy_remaining"] = r.energy_remaining;
    j["energy_cost"] = r.energy_cost;
    j["info_gain"] = r.info_gain;
    j["cumulative_info"] = r.cumulative_info;
    j["kernel_id"] = r.kernel_id;
    j["hs_speed"] = r.hs_speed;
    return j;
}

MetricsRow metrics_row(const bloom::EpisodeResult& r, const bloom::EpisodeConfig& cfg) {
    MetricsRow row;
    row.seed = r.seed;
    row.policy = bloom::to_string(r.policy);
    row.rmse_surface = r.forecast_rmse_surface;
    row.rmse_subsurface = r.forecast_rmse_subsurface;
    row.total_info = r.total_info;
    row.energy_used = r.energy_used;
    row.samples_returned = r.samples_returned;
    row.violations = r.constraints_violated;
    row.e_max = cfg.budget.e_max;
    row.n_max = cfg.budget.n_max;
    row.v_norm = r.v_norm;
    return row;
}

struct BloomRun {
    std::vector<SeedStatus> statuses;
    std::vector<std::string> shared_files;
};

BloomRun run_bloom(const json& payload, const SeedRange& seeds, int parallelism,
                   const std::string& dir) {
    const bloom::EpisodeConfig cfg = io::episode_config_from_json(payload);
    const std::size_t n = seeds.count();

    std::vector<std::optional<bloom::EpisodeResult>> results(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                results[i] = bloom::run_episode(cfg, seeds.lo + i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int threads = std::min<int>(parallelism, static_cast<int>(n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    BloomRun run;
    std::vector<MetricsRow> rows;
    for (std::size_t i = 0; i < n; ++i) {
        SeedStatus st;
        st.seed = seeds.lo + i;
        if (results[i]) {
            const bloom::EpisodeResult& r = *results[i];
            std::ostringstream lines;
            for (const bloom::StepRecord& rec : r.steps) lines << step_to_json(rec).dump() << "\n";
            const std::string name = "episode_" + std::to_string(st.seed) + ".jsonl";
            write_text_file(dir + "/" + name, lines.str());
            st.files.push_back(name);
            st.ok = true;
            rows.push_back(metrics_row(r, cfg));
        } else {
            st.error = errors[i];
        }
        run.statuses.push_back(std::move(st));
    }

    write_metrics_csv(dir + "/metrics.csv", rows);
    run.shared_files.push_back("metrics.csv");

    // Representative per-step trace of the first successful episode, in the
    // shape the thermo subcommand ingests.
    for (std::size_t i = 0; i < n; ++i) {
        if (!results[i]) continue;
        std::ostringstream trace;
        trace << "t,cumulative_info,supplied_power,hs_speed\n";
        for (const bloom::StepRecord& rec : results[i]->steps)
            trace << rec.t << "," << format_double(rec.cumulative_info) << ","
                  << format_double(rec.energy_cost) << "," << format_double(rec.hs_speed) << "\n";
        write_text_file(dir + "/trace.csv", trace.str());
        run.shared_files.push_back("trace.csv");
        break;
    }
    return run;
}

// ---- thermo ---------------------------------------------------------------

struct TraceData {
    std::vector<double> cumulative_info;  // per-step cumulative values
    std::vector<double> supplied_power;
    std::vector<double> hs_speed;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

TraceData read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open trace file");
    TraceData data;

    const bool is_csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
    std::string line;
    if (is_csv) {
        if (!std::getline(in, line)) throw SchemaError(path, "empty trace file");
        const std::vector<std::string> header = split_csv_line(line);
        int col_info = -1, col_power = -1, col_speed = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == "cumulative_info" || header[i] == "info" || header[i] == "info_cum")
                col_info = static_cast<int>(i);
            else if (header[i] == "supplied_power")
                col_power = static_cast<int>(i);
            else if (header[i] == "hs_speed")
                col_speed = static_cast<int>(i);
        }
        if (col_info < 0) throw SchemaError(path, "trace needs a cumulative_info column");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::vector<std::string> cells = split_csv_line(line);
            if (static_cast<int>(cells.size()) <= col_info)
                throw SchemaError(path, "short row in trace");
            data.cumulative_info.push_back(std::stod(cells[col_info]));
            if (col_power >= 0 && col_power < static_cast<int>(cells.size()))
                data.supplied_power.push_back(std::stod(cells[col_power]));
            if (col_speed >= 0 && col_speed < static_cast<int>(cells.size()))
                data.hs_speed.push_back(std::stod(cells[col_speed]));
        }
    } else {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw SchemaError(path, std::string("invalid JSONL: ") + e.what());
            }
            if (j.contains("cumulative_info"))
                data.cumulative_info.push_back(j.at("cumulative_info").get<double>());
            else if (j.contains("info"))
                data.cumulative_info.push_back(j.at("info").get<double>());
            else
                throw SchemaError(path, "trace line needs cumulative_info or info");
            if (j.contains("supplied_power"))
                data.supplied_power.push_back(j.at("supplied_power").get<double>());
            if (j.contains("hs_speed")) data.hs_speed.push_back(j.at("hs_speed").get<double>());
        }
    }
    if (data.cumulative_info.empty()) throw SchemaError(path, "trace has no rows");
    return data;
}

std::vector<std::string> run_thermo(const json& payload, const std::string& dir) {
    if (!payload.contains("trace") || !payload.at("trace").is_string())
        throw SchemaError("config.trace", "missing trace file path");
    const std::string trace_path = payload.at("trace").get<std::string>();
    thermo::ThermoConfig tc;
    if (payload.contains("kbt")) tc.kBT = payload.at("kbt").get<double>();

    const TraceData data = read_trace(trace_path);
    std::vector<double> traj;
    traj.reserve(data.cumulative_info.size() + 1);
    traj.push_back(0.0);  // no information before the first step
    for (double v : data.cumulative_info) traj.push_back(v);

    const thermo::LandauerLedger ledger = thermo::landauer_ledger(traj, tc);
    std::ostringstream csv;
    csv << "step,delta_I,w_min,cumulative\n";
    double cum = 0.0;
    for (const thermo::LedgerEntry& e : ledger.entries) {
        cum += e.min_work;
        csv << e.step << "," << format_double(e.delta_info) << "," << format_double(e.min_work)
            << "," << format_double(cum) << "\n";
    }
    write_text_file(dir + "/ledger.csv", csv.str());
    std::vector<std::string> files{"ledger.csv"};

    if (data.supplied_power.size() == ledger.entries.size() &&
        data.hs_speed.size() == ledger.entries.size()) {
        const thermo::SpeedLimitReport rep =
            thermo::speed_limit_check(traj, data.supplied_power, data.hs_speed, tc);
        json j;
        j["satisfied"] = rep.satisfied;
        j["first_violation"] = rep.first_violation;
        j["kbt"] = tc.kBT;
        write_text_file(dir + "/speed_check.json", j.dump(2) + "\n");
        files.push_back("speed_check.json");
    }
    return files;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    prepare_output_dir(cfg.output_dir);

    ExperimentOutcome outcome;
    if (cfg.kind == ExperimentKind::bloom) {
        const BloomRun run = run_bloom(cfg.payload, cfg.seeds, cfg.parallelism, cfg.output_dir);
        outcome.statuses = run.statuses;
        for (const SeedStatus& st : outcome.statuses) outcome.all_ok = outcome.all_ok && st.ok;
        if (!outcome.statuses.empty())
            for (const std::string& f : run.shared_files)
                outcome.statuses.front().files.push_back(f);
    } else {
        SeedStatus st;
        st.seed = cfg.seeds.lo;
        try {
            switch (cfg.kind) {
                case ExperimentKind::toy:
                    st.files = run_toy(cfg.payload, cfg.seeds, cfg.output_dir);
                    break;
                case ExperimentKind::fixedpoints:
                    st.files = run_fixedpoints(cfg.payload, cfg.output_dir);
                    break;
                case ExperimentKind::thermo:
                    st.files = run_thermo(cfg.payload, cfg.output_dir);
                    break;
                default:
                    break;
            }
            st.ok = true;
        } catch (const SchemaError&) {
            throw;  // config problems abort before any partial result
        } catch (const std::exception& e) {
            st.error = e.what();
        }
        outcome.statuses.push_back(st);
        outcome.all_ok = st.ok;
    }

    json manifest;
    manifest["tool"] = "kernelcal";
    manifest["version"] = KERNELCAL_VERSION;
    manifest["info_model"] = "gaussian_logdet";
    manifest["kind"] = to_string(cfg.kind);
    manifest["config"] = cfg.payload;
    manifest["seeds"] = {{"lo", cfg.seeds.lo}, {"hi", cfg.seeds.hi}};
    manifest["parallelism"] = cfg.parallelism;
    json runs = json::array();
    for (const SeedStatus& st : outcome.statuses) {
        json r;
        r["seed"] = st.seed;
        r["ok"] = st.ok;
        if (!st.error.empty()) r["error"] = st.error;
        r["files"] = st.files;
        runs.push_back(r);
    }
    manifest["runs"] = runs;
    const std::string manifest_path = cfg.output_dir + "/manifest.json";
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    outcome.manifest_path = manifest_path;
    return outcome;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path, "cannot open metrics file");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path, "empty metrics file");
    const std::vector<std::string> header = split_csv_line(line);
    const std::vector<std::string> expected = {
        "seed",        "policy",           "rmse_surface", "rmse_subsurface",
        "total_info",  "energy_used",      "samples_returned", "violations",
        "e_max",       "n_max",            "v_norm"};
    if (header != expected) throw SchemaError(path, "unexpected metrics header");

    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> c = split_csv_line(line);
        if (c.size() != expected.size()) throw SchemaError(path, "short metrics row");
        MetricsRow r;
        r.seed = std::stoull(c[0]);
        r.policy = c[1];
        r.rmse_surface = std::stod(c[2]);
        r.rmse_subsurface = std::stod(c[3]);
        r.total_info = std::stod(c[4]);
        r.energy_used = std::stod(c[5]);
        r.samples_returned = std::stoi(c[6]);
        r.violations = std::stoi(c[7]);
        r.e_max = std::stod(c[8]);
        r.n_max = std::stoi(c[9]);
        r.v_norm = std::stod(c[10]);
        rows.push_back(r);
    }
    return rows;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "seed,policy,rmse_surface,rmse_subsurface,total_info,energy_used,"
           "samples_returned,violations,e_max,n_max,v_norm\n";
    for (const MetricsRow& r : rows)
        out << r.seed << "," << csv_escape(r.policy) << "," << format_double(r.rmse_surface)
            << "," << format_double(r.rmse_subsurface) << "," << format_double(r.total_info)
            << "," << format_double(r.energy_used) << "," << r.samples_returned << ","
            << r.violations << "," << format_double(r.e_max) << "," << r.n_max << ","
            << format_double(r.v_norm) << "\n";
    write_text_file(path, out.str());
}

double sign_test_p_value(int wins, int n_nontie) {
    if (n_nontie <= 0) return 1.0;
    if (wins < 0 || wins > n_nontie) throw ParameterError("wins outside [0, n]");
    // Binomial coefficients are exact in double up to n = 50-ish; beyond that
    // the accumulated rounding is far below reporting precision.
    double coeff = 1.0;  // C(n, 0)
    double sum = 0.0;
    for (int k = 0; k <= n_nontie; ++k) {
        if (k >= wins) sum += coeff;
        coeff = coeff * (n_nontie - k) / (k + 1);
    }
    return sum * std::pow(0.5, n_nontie);
}

namespace {

PairedStats paired_stats(const std::vector<double>& first, const std::vector<double>& second) {
    PairedStats st;
    st.n_pairs = static_cast<int>(first.size());
    if (st.n_pairs == 0) return st;

    std::vector<double> diffs(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        diffs[i] = first[i] - second[i];
        if (first[i] < second[i])
            ++st.wins;
        else if (first[i] > second[i])
            ++st.losses;
        else
            ++st.ties;
    }
    st.win_fraction = (st.wins + 0.5 * st.ties) / st.n_pairs;
    std::sort(diffs.begin(), diffs.end());
    const std::size_t mid = diffs.size() / 2;
    st.median_diff = diffs.size() % 2 == 1 ? diffs[mid] : 0.5 * (diffs[mid - 1] + diffs[mid]);
    st.p_value = sign_test_p_value(st.wins, st.wins + st.losses);
    return st;
}

}  // namespace

ComparisonSummary compare_policies(const std::vector<MetricsRow>& adaptive,
                                   const std::vector<MetricsRow>& fixed, double v_threshold) {
    if (adaptive.empty() || fixed.empty())
        throw ComparisonRefused("comparison needs nonempty metric sets");

    std::vector<MetricsRow> a = adaptive, b = fixed;
    auto by_seed = [](const MetricsRow& x, const MetricsRow& y) { return x.seed < y.seed; };
    std::sort(a.begin(), a.end(), by_seed);
    std::sort(b.begin(), b.end(), by_seed);

    if (a.size() != b.size()) throw ComparisonRefused("seed sets differ in size");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].seed != b[i].seed)
            throw ComparisonRefused("seed sets differ at position " + std::to_string(i));
        if (a[i].e_max != b[i].e_max || a[i].n_max != b[i].n_max)
            throw ComparisonRefused("budget columns differ at seed " + std::to_string(a[i].seed));
        if (a[i].v_norm != b[i].v_norm)
            throw ComparisonRefused("world advection differs at seed " +
                                    std::to_string(a[i].seed));
    }

    ComparisonSummary s;
    s.v_threshold = v_threshold;

    std::vector<double> surf_a, surf_b, sub_a, sub_b;
    std::vector<double> hsurf_a, hsurf_b, hsub_a, hsub_b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        surf_a.push_back(a[i].rmse_surface);
        surf_b.push_back(b[i].rmse_surface);
        sub_a.push_back(a[i].rmse_subsurface);
        sub_b.push_back(b[i].rmse_subsurface);
        if (a[i].v_norm >= v_threshold) {
            hsurf_a.push_back(a[i].rmse_surface);
            hsurf_b.push_back(b[i].rmse_surface);
            hsub_a.push_back(a[i].rmse_subsurface);
            hsub_b.push_back(b[i].rmse_subsurface);
        }
    }
    s.surface = paired_stats(surf_a, surf_b);
    s.subsurface = paired_stats(sub_a, sub_b);
    s.surface_high_advection = paired_stats(hsurf_a, hsurf_b);
    s.subsurface_high_advection = paired_stats(hsub_a, hsub_b);
    s.high_advection_pairs = static_cast<int>(hsub_a.size());
    return s;
}

nlohmann::json comparison_to_json(const ComparisonSummary& s) {
    auto stats = [](const PairedStats& p) {
        return json{{"n_pairs", p.n_pairs},     {"wins", p.wins},
                    {"losses", p.losses},       {"ties", p.ties},
                    {"win_fraction", p.win_fraction}, {"median_diff", p.median_diff},
                    {"p_value", p.p_value}};
    };
    json j;
    j["surface"] = stats(s.surface);
    j["subsurface"] = stats(s.subsurface);
    j["surface_high_advection"] = stats(s.surface_high_advection);
    j["subsurface_high_advection"] = stats(s.subsurface_high_advection);
    j["high_advection_pairs"] = s.high_advection_pairs;
    j["v_threshold"] = s.v_threshold;
    j["budgets_equal"] = s.budgets_equal;
    j["seeds_match"] = s.seeds_match;
    return j;
}

}  // namespace kernelcal::harness
