#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "kernelcal/errors.hpp"
#include "kernelcal/harness.hpp"
#include "kernelcal/json_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;
constexpr int kExitRefused = 4;

}  // namespace

int main(int argc, char** argv) {
    using namespace kernelcal;

    CLI::App app{"kernelcal: maximum-caliber kernel dynamics workbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string seeds_text = "0";
    std::string policy_text;
    std::string trace_path;
    std::string adaptive_path, fixed_path;
    double kbt = 1.0;
    double v_threshold = 0.05;
    int parallelism = 1;

    CLI::App* toy = app.add_subcommand("toy", "Gibbs path measure on a finite kernel family");
    toy->add_option("--config", config_path, "JSON config")->required();
    toy->add_option("--out", out_dir, "output directory");
    toy->add_option("--seeds", seeds_text, "seed or a..b range (used for sampling)");

    CLI::App* thermo_cmd =
        app.add_subcommand("thermo", "Landauer ledger and speed-limit check from a trace");
    thermo_cmd->add_option("--trace", trace_path, "trace file (.jsonl or .csv)")->required();
    thermo_cmd->add_option("--kbt", kbt, "energy per nat");
    thermo_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* fp = app.add_subcommand("fixedpoints", "self-consistent kernel search and scan");
    fp->add_option("--config", config_path, "JSON config")->required();
    fp->add_option("--out", out_dir, "output directory");

    CLI::App* bloom_cmd = app.add_subcommand("bloom", "adaptive-sampling lake episodes");
    bloom_cmd->add_option("--config", config_path, "JSON config")->required();
    bloom_cmd->add_option("--seeds", seeds_text, "seed or a..b range");
    bloom_cmd->add_option("--policy", policy_text, "adaptive | fixed_a | fixed_b");
    bloom_cmd->add_option("--out", out_dir, "output directory");
    bloom_cmd->add_option("--parallelism", parallelism, "worker threads over seeds");

    CLI::App* cmp = app.add_subcommand("compare", "paired adaptive-vs-fixed comparison");
    cmp->add_option("--adaptive", adaptive_path, "metrics.csv of the adaptive runs")->required();
    cmp->add_option("--fixed", fixed_path, "metrics.csv of the fixed runs")->required();
    cmp->add_option("--out", out_dir, "output directory");
    cmp->add_option("--v-threshold", v_threshold, "high-advection cutoff on |v|");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (app.got_subcommand(cmp)) {
            const auto a = harness::read_metrics_csv(adaptive_path);
            const auto b = harness::read_metrics_csv(fixed_path);
            const harness::ComparisonSummary summary =
                harness::compare_policies(a, b, v_threshold);
            harness::prepare_output_dir(out_dir);
            const nlohmann::json j = harness::comparison_to_json(summary);
            const std::string text = j.dump(2) + "\n";
            std::FILE* f = std::fopen((out_dir + "/comparison.json").c_str(), "wb");
            if (!f) throw DataError("cannot write comparison.json in " + out_dir);
            std::fwrite(text.data(), 1, text.size(), f);
            std::fclose(f);
            std::printf("%s", text.c_str());
            return kExitOk;
        }

        harness::ExperimentConfig cfg;
        cfg.output_dir = out_dir;
        cfg.parallelism = parallelism;
        cfg.seeds = harness::parse_seed_range(seeds_text);

        if (app.got_subcommand(toy)) {
            cfg.kind = harness::ExperimentKind::toy;
            cfg.payload = io::load_json_file(config_path);
        } else if (app.got_subcommand(thermo_cmd)) {
            cfg.kind = harness::ExperimentKind::thermo;
            cfg.payload = {{"trace", trace_path}, {"kbt", kbt}};
        } else if (app.got_subcommand(fp)) {
            cfg.kind = harness::ExperimentKind::fixedpoints;
            cfg.payload = io::load_json_file(config_path);
        } else {
            cfg.kind = harness::ExperimentKind::bloom;
            cfg.payload = io::load_json_file(config_path);
            if (!policy_text.empty()) cfg.payload["policy"] = policy_text;
        }

        const harness::ExperimentOutcome outcome = harness::run_experiment(cfg);
        if (!outcome.all_ok) {
            for (const harness::SeedStatus& st : outcome.statuses)
                if (!st.ok)
                    std::fprintf(stderr, "seed %llu failed: %s\n",
                                 static_cast<unsigned long long>(st.seed), st.error.c_str());
            return kExitPartial;
        }
        std::printf("wrote %s\n", outcome.manifest_path.c_str());
        return kExitOk;
    } catch (const ComparisonRefused& e) {
        std::fprintf(stderr, "comparison refused: %s\n", e.what());
        return kExitRefused;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ShapeError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "config error: %s (achievable range [%g, %g])\n", e.what(),
                     e.achievable_lo, e.achievable_hi);
        return kExitConfig;
    } catch (const DataError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitPartial;
    }
}
