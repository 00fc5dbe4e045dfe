/*
 * Copyright 2026 The vimasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// vimasim: run, sweep and compare VIMA against the AVX baseline.
//
// Exit codes: 0 ok, 1 usage, 2 validation, 3 oracle mismatch, 4 simulated fault.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vimasim/config.hpp"
#include "vimasim/experiment.hpp"
#include "vimasim/isa.hpp"
#include "vimasim/kernels.hpp"
#include "vimasim/metrics.hpp"

namespace {

using namespace vima;

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kOracle = 3, kFault = 4 };

struct Common {
    std::string kernel;
    std::optional<double> size_mb;
    std::optional<std::uint64_t> seed;
    std::string config_file;
    std::vector<std::string> sets;
    std::string out;
    std::optional<std::uint64_t> knn_features;
    std::optional<std::uint64_t> mlp_features;
    std::optional<std::uint64_t> max_outer;
    bool idle_uncore_off = false;
    unsigned jobs = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    std::vector<std::string> kernels;
    for (auto k : {KernelId::memset, KernelId::memcopy, KernelId::vecsum, KernelId::stencil, KernelId::matmult,
                   KernelId::knn, KernelId::mlp})
        kernels.emplace_back(to_string(k));
    cmd->add_option("--kernel", c.kernel, "Kernel to run")->required()->check(CLI::IsMember(kernels));
    cmd->add_option("--size-mb", c.size_mb, "Data footprint in MiB (default from config, 16)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "Dataset seed (default 0x5EEDC0DE2021)");
    cmd->add_option("--config", c.config_file, "Config file of `section.key = value` lines")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", c.sets, "Override one config key, `section.key=value` (repeatable)");
    cmd->add_option("--out", c.out, "CSV output path (default: stdout)");
    cmd->add_option("--knn-features", c.knn_features, "knn features per instance (default derived from size)");
    cmd->add_option("--mlp-features", c.mlp_features, "mlp input features (default derived from size)");
    cmd->add_option("--max-outer", c.max_outer, "Simulate only the first N outer iterations (0 = all)");
    cmd->add_flag("--idle-uncore-off", c.idle_uncore_off, "Drop host cache static power from VIMA runs");
    cmd->add_option("--jobs", c.jobs, "Parallel simulations for sweep/compare (0 = all cores)");
}

SimConfig build_config(const Common& c) {
    SimConfig cfg = c.config_file.empty() ? SimConfig{} : load_config_file(c.config_file);
    cfg.workload.kernel = *parse_kernel(c.kernel);
    if (c.size_mb) cfg.workload.footprint_bytes = static_cast<std::uint64_t>(std::llround(*c.size_mb * (1 << 20)));
    if (c.seed) cfg.workload.seed = *c.seed;
    if (c.knn_features) cfg.workload.knn_features = *c.knn_features;
    if (c.mlp_features) cfg.workload.mlp_features = *c.mlp_features;
    if (c.max_outer) cfg.workload.max_outer = *c.max_outer;
    if (c.idle_uncore_off) cfg.energy.idle_uncore_off = true;
    for (const auto& s : c.sets) apply_override(cfg, s);
    return cfg;
}

void write_rows(const std::vector<ResultRow>& rows, const std::string& out) {
    if (out.empty()) {
        std::cout << render_csv(rows);
    } else {
        emit_csv(rows, out);
    }
}

// `run` appends to an existing report instead of replacing it.
void append_row(const ResultRow& row, const std::string& out) {
    if (out.empty() || !std::filesystem::is_regular_file(out) || std::filesystem::file_size(out) == 0) {
        write_rows({row}, out);
        return;
    }
    std::string text = render_csv({row});
    text.erase(0, text.find('\n') + 1);
    std::ofstream f(out, std::ios::app | std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + out);
}

std::vector<std::uint64_t> parse_u64_list(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> v;
    for (const auto& s : items) v.push_back(std::stoull(s));
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vimasim: cycle-level VIMA near-data vector engine and AVX host baseline"};
    app.require_subcommand(1);

    Common run_c, sweep_c, cmp_c, trace_c;
    std::string run_backend = "vima", sweep_backend = "vima";
    std::uint64_t run_threads = 1;
    std::string detail_path, sweep_param;
    std::vector<std::string> sweep_values, threads_list;
    bool inject_mismatch = false;
    std::optional<std::uint64_t> inject_fault;
    const std::vector<std::string> backends{"scalar", "avx", "vima"};

    auto* run = app.add_subcommand("run", "Simulate one kernel on one backend and emit one CSV row");
    add_common(run, run_c);
    run->add_option("--backend", run_backend, "scalar, avx or vima")->check(CLI::IsMember(backends));
    run->add_option("--threads", run_threads, "Host threads (AVX baseline)")->check(CLI::PositiveNumber);
    run->add_option("--detail", detail_path, "Write a flat key = value dump of every counter");
    run->add_option("--inject-fault", inject_fault, "Send VIMA instruction N beyond memory (exercises precise faults)");

    auto* sw = app.add_subcommand("sweep", "Run one backend across values of any config key");
    add_common(sw, sweep_c);
    sw->add_option("--backend", sweep_backend, "scalar, avx or vima")->check(CLI::IsMember(backends));
    sw->add_option("--param", sweep_param, "Config key to sweep, e.g. topology.vima_cache_bytes")->required();
    sw->add_option("--values", sweep_values, "Comma-separated values")->required()->delimiter(',');

    auto* cmp = app.add_subcommand("compare", "Check VIMA against the scalar oracle, then time AVX and VIMA");
    add_common(cmp, cmp_c);
    cmp->add_option("--threads-list", threads_list, "Comma-separated AVX thread counts (1 is always run)")
        ->delimiter(',');
    cmp->add_flag("--inject-mismatch", inject_mismatch, "Corrupt one VIMA output byte (exercises the oracle gate)");

    auto* tr = app.add_subcommand("trace", "Export the VIMA instruction stream in the text trace format");
    add_common(tr, trace_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            SimConfig cfg = build_config(run_c);
            cfg.workload.backend = *parse_backend(run_backend);
            cfg.workload.threads = run_threads;
            if (inject_fault && cfg.workload.backend != Backend::vima)
                throw CLI::ValidationError("--inject-fault", "needs --backend vima");
            RunOutcome r = run_once(cfg, inject_fault);
            const ResultRow row = make_row(r.stats, cfg.energy, nullptr);
            // A faulted run reports on stderr only.
            if (r.stats.faults.empty()) append_row(row, run_c.out);
            if (!detail_path.empty()) {
                std::ofstream f(detail_path, std::ios::binary);
                f << detail_dump(r.stats, cfg.energy);
                if (!f) throw std::runtime_error("cannot write " + detail_path);
            }
            std::fprintf(stderr, "%s %s %.3fMB %lluT: %llu cycles, %.3f us, %.3f uJ%s\n",
                         std::string(to_string(row.kernel)).c_str(), std::string(to_string(row.backend)).c_str(),
                         row.size_mb, static_cast<unsigned long long>(row.threads),
                         static_cast<unsigned long long>(row.cycles), static_cast<double>(row.elapsed_ps) * 1e-6,
                         row.energy_pj * 1e-6, r.stats.faults.empty() ? "" : ", FAULT");
            if (!r.stats.faults.empty()) {
                std::fprintf(stderr, "fault: %s\n", r.stats.faults.front().c_str());
                return kFault;
            }
        } else if (*sw) {
            SimConfig cfg = build_config(sweep_c);
            cfg.workload.backend = *parse_backend(sweep_backend);
            if (sweep_values.empty()) throw CLI::ValidationError("--values", "empty value list");
            write_rows(sweep(cfg, sweep_param, sweep_values, {sweep_c.jobs, {}}), sweep_c.out);
        } else if (*cmp) {
            SimConfig cfg = build_config(cmp_c);
            PlanOptions opt{cmp_c.jobs, {}};
            if (inject_mismatch) {
                const Workload w = plan(cfg);
                std::uint64_t addr = 0;
                for (const auto& r : w.regions)
                    if (r.output) addr = r.base;
                opt.tamper = [addr](BackingStore& m) { m.store<std::uint8_t>(addr, m.load<std::uint8_t>(addr) ^ 0x5A); };
            }
            write_rows(compare(cfg, parse_u64_list(threads_list), opt), cmp_c.out);
        } else if (*tr) {
            const SimConfig cfg = build_config(trace_c);
            const std::string text = encode_trace(vima_instructions(plan(cfg)));
            if (trace_c.out.empty()) {
                std::cout << text;
            } else {
                std::ofstream f(trace_c.out, std::ios::binary);
                f << text;
                if (!f) throw std::runtime_error("cannot write " + trace_c.out);
            }
        }
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "usage: %s\n", e.what());
        return kUsage;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "invalid configuration:\n");
        for (const auto& v : e.violations()) std::fprintf(stderr, "  %s\n", v.c_str());
        return kValidation;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config: %s\n", e.what());
        return kValidation;
    } catch (const KernelError& e) {
        std::fprintf(stderr, "workload: %s\n", e.what());
        return kValidation;
    } catch (const OracleMismatch& e) {
        std::fprintf(stderr, "oracle mismatch: %s\n", e.what());
        return kOracle;
    } catch (const SimulatedFault& e) {
        std::fprintf(stderr, "simulated fault: %s\n", e.what());
        return kFault;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
    return kOk;
}
