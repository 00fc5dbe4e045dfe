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

#include "vimasim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <thread>

#include "vimasim/host.hpp"
#include "vimasim/simcore.hpp"
#include "vimasim/vima_engine.hpp"

namespace vima {

namespace {

void fill_memory_stats(SimStats& s, const VaultArray& dram, const HostLinks& links) {
    s.dram = dram.counters();
    s.link_bytes = links.bytes_moved();
    s.dram_read_busy_vima = dram.read_busy_time(Origin::vima);
    s.dram_read_busy_host = dram.read_busy_time(Origin::host);
    s.dram_read_bound = dram.read_bound_bytes_per_s();
}

// Runs tasks on up to `jobs` threads; results and the first error (in task
// order) do not depend on scheduling.
template <typename R>
std::vector<R> run_all(const std::vector<std::function<R()>>& tasks, unsigned jobs) {
    std::vector<R> out(tasks.size());
    std::vector<std::exception_ptr> err(tasks.size());
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, tasks.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
            try {
                out[i] = tasks[i]();
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

SimConfig with_backend(SimConfig c, Backend b, std::uint64_t threads) {
    c.workload.backend = b;
    c.workload.threads = threads;
    return c;
}

class FaultingSource : public OpSource {
public:
    FaultingSource(std::unique_ptr<OpSource> inner, std::uint64_t at, std::uint64_t capacity)
        : inner_(std::move(inner)), at_(at), capacity_(capacity) {}

    bool next(HostOp& op) override {
        if (!inner_->next(op)) return false;
        if (op.kind == HostOpKind::vima && seen_++ == at_) op.vima.dst = capacity_;
        return true;
    }

private:
    std::unique_ptr<OpSource> inner_;
    std::uint64_t at_, capacity_;
    std::uint64_t seen_ = 0;
};

void require_no_fault(const SimStats& s) {
    if (!s.faults.empty()) throw SimulatedFault(std::string(to_string(s.backend)) + ": " + s.faults.front());
}

}  // namespace

RunOutcome run_once(const SimConfig& cfg, std::optional<std::uint64_t> fault_at) {
    if (auto v = validate(cfg); !v.empty()) throw ValidationError(std::move(v));
    const auto& wl = cfg.workload;
    if (wl.backend == Backend::vima && wl.threads != 1)
        throw ValidationError({"workload.threads: the VIMA backend runs one host thread"});

    RunOutcome out;
    out.workload = plan(cfg);
    out.mem = std::make_unique<BackingStore>();
    generate(out.workload, *out.mem);

    SimStats& s = out.stats;
    s.kernel = wl.kernel;
    s.backend = wl.backend;
    s.footprint_bytes = wl.footprint_bytes;
    s.threads = wl.threads;
    s.seed = wl.seed;
    s.line_bytes = cfg.topology.line_bytes;

    if (wl.backend == Backend::scalar) {
        scalar_reference(out.workload, *out.mem);
        return out;
    }

    EventQueue q;
    VaultArray dram(cfg.topology, cfg.timing);
    HostLinks links(cfg.topology, cfg.timing);
    HostRunResult r;

    if (wl.backend == Backend::vima) {
        VimaEngine engine(cfg, q, dram, *out.mem);
        HostSystem host(cfg, q, dram, links, &engine, 1);
        std::vector<std::unique_ptr<OpSource>> src;
        src.push_back(vima_source(out.workload, *out.mem));
        if (fault_at)
            src.back() = std::make_unique<FaultingSource>(std::move(src.back()), *fault_at, cfg.topology.capacity_bytes);
        r = host.run(src);
        s.host = host.counters();
        s.vima = engine.counters();
    } else {
        HostSystem host(cfg, q, dram, links, nullptr, wl.threads);
        auto src = avx_sources(out.workload, wl.threads);
        r = host.run(src);
        s.host = host.counters();
    }

    s.elapsed = r.elapsed;
    s.core_cycles = r.core_cycles.empty() ? 0 : *std::max_element(r.core_cycles.begin(), r.core_cycles.end());
    if (r.fault) s.faults.push_back(*r.fault + " (op " + std::to_string(r.fault_op) + ")");
    fill_memory_stats(s, dram, links);
    return out;
}

ResultRow make_row(const SimStats& s, const EnergyConfig& e, const SimStats* avx1) {
    ResultRow row;
    row.kernel = s.kernel;
    row.backend = s.backend;
    row.size_mb = static_cast<double>(s.footprint_bytes) / static_cast<double>(1ULL << 20);
    row.threads = s.threads;
    row.cycles = s.core_cycles;
    row.elapsed_ps = s.elapsed.ps;
    row.energy_pj = total_energy(s, e, scope_for(s, e)).total();
    if (avx1 && s.elapsed.ps != 0) {
        row.speedup = speedup(*avx1, s);
        const double base = total_energy(*avx1, e, scope_for(*avx1, e)).total();
        row.energy_ratio = base > 0 ? row.energy_pj / base : 0.0;
    }
    return quantize(row);
}

std::vector<ResultRow> compare(const SimConfig& cfg, std::vector<std::uint64_t> threads_list, const PlanOptions& opt) {
    if (threads_list.empty() || threads_list.front() != 1) {
        std::erase(threads_list, 1);
        threads_list.insert(threads_list.begin(), 1);
    }

    // Correctness first: the oracle and the VIMA image must agree before
    // any timing is reported.
    std::vector<std::function<RunOutcome()>> tasks;
    tasks.push_back([&] { return run_once(with_backend(cfg, Backend::scalar, 1)); });
    tasks.push_back([&] { return run_once(with_backend(cfg, Backend::vima, 1)); });
    for (auto t : threads_list) tasks.push_back([&cfg, t] { return run_once(with_backend(cfg, Backend::avx, t)); });

    auto runs = run_all(tasks, opt.jobs);
    RunOutcome& oracle = runs[0];
    RunOutcome& vima = runs[1];
    require_no_fault(vima.stats);
    if (opt.tamper) opt.tamper(*vima.mem);
    std::string why;
    if (!outputs_match(oracle.workload, *oracle.mem, *vima.mem, kOracleRelTol, &why))
        throw OracleMismatch(std::string(to_string(cfg.workload.kernel)) + ": VIMA output differs from the scalar oracle: " +
                             why);

    std::vector<ResultRow> rows;
    const SimStats& avx1 = runs[2].stats;
    for (std::size_t i = 2; i < runs.size(); ++i) {
        require_no_fault(runs[i].stats);
        rows.push_back(make_row(runs[i].stats, cfg.energy, &avx1));
    }
    rows.push_back(make_row(vima.stats, cfg.energy, &avx1));
    return rows;
}

std::vector<ResultRow> sweep(const SimConfig& cfg, const std::string& key, const std::vector<std::string>& values,
                             const PlanOptions& opt) {
    if (values.empty()) throw std::invalid_argument("sweep: empty value list");

    std::vector<SimConfig> points;
    for (const auto& v : values) {
        SimConfig c = cfg;
        set_key(c, key, v);
        if (auto bad = validate(c); !bad.empty()) throw ValidationError(std::move(bad));
        points.push_back(std::move(c));
    }

    // Baselines are shared between points whose AVX config is identical.
    std::map<std::string, std::size_t> base_of;
    std::vector<SimConfig> baselines;
    std::vector<std::size_t> point_base;
    for (const auto& c : points) {
        SimConfig b = with_backend(c, Backend::avx, 1);
        auto [it, fresh] = base_of.emplace(render_config(b), baselines.size());
        if (fresh) baselines.push_back(b);
        point_base.push_back(it->second);
    }

    std::vector<std::function<SimStats()>> tasks;
    for (const auto& b : baselines) tasks.push_back([&b] { return run_once(b).stats; });
    for (const auto& c : points) tasks.push_back([&c] { return run_once(c).stats; });
    auto stats = run_all(tasks, opt.jobs);

    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SimStats& s = stats[baselines.size() + i];
        require_no_fault(s);
        const SimStats& base = stats[point_base[i]];
        rows.push_back(make_row(s, points[i].energy, s.backend == Backend::scalar ? nullptr : &base));
    }
    return rows;
}

}  // namespace vima
