// Command-line front end: simulate / sweep / inspect.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oisa/runner.hpp"

namespace fs = std::filesystem;
using namespace oisa;

namespace {

int exit_code_for(const sim_error& e) {
    switch (e.kind()) {
    case errc::config: return 2;
    case errc::fixture: return 3;
    default: return 1;
    }
}

// "--set core.awc.noise_sigma=0.1" style overrides; values parse as JSON with
// a fallback to plain strings
void apply_cli_overrides(RunConfig& rc, const std::vector<std::string>& sets) {
    for (const std::string& s : sets) {
        auto eq = s.find('=');
        require(eq != std::string::npos, errc::config, "--set expects key=value, got '" + s + "'");
        std::string key = s.substr(0, eq);
        std::string raw = s.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;

        if (key.rfind("core.", 0) == 0)
            apply_override(rc.core, key.substr(5), value);
        else if (key.rfind("constants.", 0) == 0)
            apply_override(rc.constants, key.substr(10), value);
        else if (key.rfind("layer.", 0) == 0)
            apply_override(rc.layer, key.substr(6), value);
        else if (key == "seed")
            rc.seed = value.get<std::uint64_t>();
        else if (key == "mode") {
            std::string m = value.get<std::string>();
            require(m == "ideal" || m == "noisy", errc::config, "mode must be ideal or noisy");
            rc.mode = m == "ideal" ? RunMode::ideal : RunMode::noisy;
        } else if (key == "threads")
            rc.threads = value.get<int>();
        else if (key == "output_dir")
            rc.output_dir = value.is_string() ? value.get<std::string>() : raw;
        else
            apply_override(rc.core, key, value); // bare device paths target the core config
    }
}

void write_atomic(const fs::path& path, const std::string& payload) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        require(os.good(), errc::fixture, "cannot write " + tmp.string());
        os << payload;
        require(os.good(), errc::fixture, "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string timestamp_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_report(const fs::path& dir, const std::string& stem, const RunConfig& rc,
                  const RunOutcome& out) {
    fs::create_directories(dir);
    json j = outcome_to_json(rc, out);
    j["timestamp"] = timestamp_now(); // the one wall-clock field; strip before diffing
    write_atomic(dir / (stem + ".json"), j.dump(2) + "\n");

    std::ostringstream sum;
    sum << "oisa run summary\n";
    sum << "mode " << (rc.mode == RunMode::ideal ? "ideal" : "noisy") << " seed " << rc.seed
        << "\n";
    sum << "cycles " << out.perf.total_cycles << " macs " << out.perf.total_macs
        << " utilization " << out.perf.utilization << "\n";
    sum << "latency_s " << out.perf.latency << " (compute " << out.perf.compute_latency
        << ", tuning " << out.perf.tuning_latency << ")\n";
    sum << "energy_j " << out.perf.total_energy << " power_w " << out.perf.average_power << "\n";
    sum << "throughput_ops " << out.perf.throughput << " efficiency_ops_per_w "
        << out.perf.efficiency << " frame_rate_fps " << out.perf.frame_rate << "\n";
    if (out.eval)
        sum << "accuracy " << out.eval->accuracy << " config " << out.eval->config_id << "\n";
    write_atomic(dir / (stem + ".txt"), sum.str());
}

int cmd_simulate(const fs::path& config, const std::vector<std::string>& sets) {
    RunConfig rc = load_run_config(config);
    apply_cli_overrides(rc, sets);
    RunOutcome out = execute_run(rc);
    write_report(rc.output_dir, "report", rc, out);
    std::cout << "report written to " << (rc.output_dir / "report.json").string() << "\n";
    return 0;
}

int cmd_sweep(const fs::path& config, const std::vector<std::string>& sets) {
    RunConfig rc = load_run_config(config);
    apply_cli_overrides(rc, sets);
    require(!rc.sweep.empty(), errc::config, "sweep: config has no sweep axes");

    std::vector<std::size_t> idx(rc.sweep.size(), 0);
    std::vector<json> rows;
    bool partial = false;
    int point = 0;
    bool done = false;
    while (!done) {
        RunConfig pt = rc;
        json row;
        row["point"] = point;
        for (std::size_t a = 0; a < rc.sweep.size(); ++a) {
            const SweepAxis& ax = rc.sweep[a];
            const json& v = ax.values[idx[a]];
            row[ax.param] = v;
            std::string key = ax.param;
            if (key.rfind("core.", 0) == 0)
                apply_override(pt.core, key.substr(5), v);
            else if (key.rfind("constants.", 0) == 0)
                apply_override(pt.constants, key.substr(10), v);
            else if (key.rfind("layer.", 0) == 0)
                apply_override(pt.layer, key.substr(6), v);
            else
                apply_override(pt.core, key, v);
        }
        try {
            RunOutcome out = execute_run(pt);
            write_report(pt.output_dir, "report_" + std::to_string(point), pt, out);
            row["status"] = "ok";
            row["weight_bits"] = out.cfg.awc.bit_width;
            row["noise_gain_error_msb"] =
                out.cfg.awc.gain_error_per_bit[std::size_t(out.cfg.awc.bit_width - 1)];
            row["accuracy"] = out.eval ? json(out.eval->accuracy) : json();
            row["power_w"] = out.perf.average_power;
            row["efficiency_ops_per_w"] = out.perf.efficiency;
            row["frame_rate_fps"] = out.perf.frame_rate;
            row["macs_per_cycle"] = out.schedule.layer.kind == LayerKind::conv
                                        ? macs_per_cycle(out.cfg.num_banks,
                                                         out.schedule.layer.kernel)
                                        : 0;
        } catch (const sim_error& e) {
            row["status"] = std::string("error: ") + e.what();
            partial = true;
        }
        rows.push_back(row);
        ++point;

        done = true;
        for (std::size_t a = rc.sweep.size(); a-- > 0;) {
            if (++idx[a] < rc.sweep[a].values.size()) {
                done = false;
                break;
            }
            idx[a] = 0;
        }
    }

    // combined CSV, one row per grid point
    std::ostringstream csv;
    csv << "point";
    for (const auto& ax : rc.sweep) csv << "," << ax.param;
    csv << ",status,weight_bits,noise_gain_error_msb,accuracy,power_w,efficiency_ops_per_w,"
           "frame_rate_fps,macs_per_cycle\n";
    for (const json& row : rows) {
        csv << row["point"];
        for (const auto& ax : rc.sweep) csv << "," << row[ax.param].dump();
        auto cell = [&](const char* key) {
            csv << ",";
            if (row.contains(key) && !row[key].is_null())
                csv << (row[key].is_string() ? row[key].get<std::string>() : row[key].dump());
        };
        cell("status");
        cell("weight_bits");
        cell("noise_gain_error_msb");
        cell("accuracy");
        cell("power_w");
        cell("efficiency_ops_per_w");
        cell("frame_rate_fps");
        cell("macs_per_cycle");
        csv << "\n";
    }
    fs::create_directories(rc.output_dir);
    write_atomic(rc.output_dir / "sweep.csv", csv.str());
    std::cout << "sweep of " << point << " points written to "
              << (rc.output_dir / "sweep.csv").string() << "\n";
    if (partial) std::cout << "warning: some grid points failed (see status column)\n";
    return partial ? 1 : 0;
}

LayerSpec parse_schedule_layer(const std::string& line) {
    std::istringstream is(line);
    std::string tok, kind, dims;
    LayerSpec l;
    is >> tok >> kind;
    require(tok == "layer" && (kind == "conv" || kind == "mlp"), errc::fixture,
            "inspect: malformed schedule layer line");
    l.kind = kind == "conv" ? LayerKind::conv : LayerKind::mlp;
    is >> tok >> dims; // "in HxWxC"
    char x1, x2;
    std::istringstream ds(dims);
    ds >> l.in_height >> x1 >> l.in_width >> x2 >> l.in_channels;
    is >> tok >> l.kernel >> tok >> l.out_channels >> tok >> l.stride >> tok >> l.padding;
    l.validate();
    return l;
}

int cmd_inspect(const fs::path& path) {
    require(fs::exists(path), errc::fixture, "inspect: no such path: " + path.string());

    if (fs::is_directory(path)) {
        FixtureContainer fc = load_fixture(path); // checksum-validates every blob
        std::cout << "fixture " << path.string() << "\n";
        for (const auto& [name, t] : fc.tensors) {
            std::cout << "  " << name << " " << dtype_name(t.dtype) << " [";
            for (std::size_t i = 0; i < t.shape.size(); ++i)
                std::cout << (i ? "," : "") << t.shape[i];
            std::cout << "] fnv1a64=" << hex64(fnv1a64(t.raw.data(), t.raw.size())) << "\n";
        }
        if (!fc.metadata.is_null()) std::cout << "  metadata: " << fc.metadata.dump() << "\n";
        return 0;
    }

    std::ifstream is(path);
    std::string header, layer_line;
    std::getline(is, header);
    if (header == "oisa-schedule v1") {
        std::getline(is, layer_line);
        CoreConfig cfg;
        Schedule s = plan_layer(parse_schedule_layer(layer_line), cfg);
        std::cout << schedule_to_string(s);
        int total_arms = cfg.num_banks * cfg.arms_per_bank;
        int used = s.rounds.empty() ? 0 : s.rounds[0].instance_count * s.shape.arms();
        std::cout << "occupancy " << used << "/" << total_arms << " arms (round 0)\n";
        std::cout << "per-bank arm usage "
                  << (s.shape.kernels_per_bank > 0 ? s.shape.kernels_per_bank * s.shape.arms()
                                                   : cfg.arms_per_bank)
                  << "/" << cfg.arms_per_bank << " with VOM depth " << s.shape.arms() << "\n";
        return 0;
    }
    // fall back to run-config json with a layer
    RunConfig rc = load_run_config(path);
    require(!rc.layer.is_null() || !rc.model_path.empty(), errc::fixture,
            "inspect: unrecognized input: " + path.string());
    RunOutcome out = execute_run(rc);
    std::cout << schedule_to_string(out.schedule);
    int total_arms = out.cfg.num_banks * out.cfg.arms_per_bank;
    int used = out.schedule.rounds.empty()
                   ? 0
                   : out.schedule.rounds[0].instance_count * out.schedule.shape.arms();
    std::cout << "occupancy " << used << "/" << total_arms << " arms (round 0)\n";
    std::cout << "per-bank arm usage "
              << (out.schedule.shape.kernels_per_bank > 0
                      ? out.schedule.shape.kernels_per_bank * out.schedule.shape.arms()
                      : out.cfg.arms_per_bank)
              << "/" << out.cfg.arms_per_bank << " with VOM depth " << out.schedule.shape.arms()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OISA optical in-sensor accelerator simulator"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> sets;
    std::string inspect_path;

    auto* sim = app.add_subcommand("simulate", "run one simulation and write reports");
    sim->add_option("--config", config, "run configuration (json)")->required();
    sim->add_option("--set", sets, "override any config value, key=value");

    auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write a combined table");
    sweep->add_option("--config", config, "run configuration with sweep axes (json)")->required();
    sweep->add_option("--set", sets, "override any config value, key=value");

    auto* inspect = app.add_subcommand("inspect", "dump a schedule or fixture");
    inspect->add_option("path", inspect_path, "schedule file, fixture directory, or run config")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config, sets);
        if (sweep->parsed()) return cmd_sweep(config, sets);
        if (inspect->parsed()) return cmd_inspect(inspect_path);
    } catch (const sim_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
