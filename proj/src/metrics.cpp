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

#include "vimasim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vima {

namespace {

constexpr double kPjPerJoule = 1e12;

double fixed(double v, double scale) { return std::round(v * scale) / scale; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

EnergyScope scope_for(const SimStats& s, const EnergyConfig& e, bool dram_static) {
    EnergyScope sc;
    sc.vima = s.backend == Backend::vima;
    sc.host_cache_static = !(sc.vima && e.idle_uncore_off);
    sc.dram_static = dram_static;
    return sc;
}

EnergyBreakdown total_energy(const SimStats& s, const EnergyConfig& e, const EnergyScope& scope) {
    EnergyBreakdown b;
    const double bits = static_cast<double>(s.line_bytes) * 8.0;
    b.l1_dyn = static_cast<double>(s.host.l1_accesses) * e.l1_line_pj;
    b.l2_dyn = static_cast<double>(s.host.l2_accesses) * e.l2_line_pj;
    b.llc_dyn = static_cast<double>(s.host.llc_accesses) * e.llc_line_pj;
    b.dram_dyn = static_cast<double>(s.dram.by(Origin::host)) * bits * e.dram_x86_pj_per_bit +
                 static_cast<double>(s.dram.by(Origin::vima)) * bits * e.dram_vima_pj_per_bit;
    b.vima_cache_dyn = static_cast<double>(s.vima.cache_line_accesses) * e.vima_cache_line_pj;

    const double t = s.elapsed.seconds() * kPjPerJoule;
    const double cores = static_cast<double>(s.threads);
    b.core_static = e.core_w * cores * t;
    if (scope.host_cache_static) {
        b.l1_static = e.l1_w * cores * t;
        b.l2_static = e.l2_w * cores * t;
        b.llc_static = e.llc_w * t;
    }
    if (scope.dram_static) b.dram_static = e.dram_w * t;
    if (scope.vima) {
        b.vima_logic_static = e.vima_logic_w * t;
        b.vima_cache_static = e.vima_cache_w * t;
    }
    return b;
}

double speedup(const SimStats& baseline, const SimStats& candidate) {
    if (candidate.elapsed.ps == 0) throw std::invalid_argument("speedup: candidate has zero elapsed time");
    return static_cast<double>(baseline.elapsed.ps) / static_cast<double>(candidate.elapsed.ps);
}

ResultRow quantize(ResultRow r) {
    r.size_mb = fixed(r.size_mb, 1e6);
    r.energy_pj = fixed(r.energy_pj, 1e3);
    r.speedup = fixed(r.speedup, 1e6);
    r.energy_ratio = fixed(r.energy_ratio, 1e6);
    return r;
}

const char* const kCsvHeader = "kernel,backend,size_mb,threads,cycles,elapsed_ps,energy_pj,speedup,energy_ratio";

std::string render_csv(const std::vector<ResultRow>& rows) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& raw : rows) {
        const ResultRow r = quantize(raw);
        out += std::string(to_string(r.kernel)) + "," + std::string(to_string(r.backend)) + "," +
               fmt("%.6f", r.size_mb) + "," + std::to_string(r.threads) + "," + std::to_string(r.cycles) + "," +
               std::to_string(r.elapsed_ps) + "," + fmt("%.3f", r.energy_pj) + "," + fmt("%.6f", r.speedup) + "," +
               fmt("%.6f", r.energy_ratio) + "\n";
    }
    return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("csv: missing header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 9) throw std::runtime_error("csv: expected 9 fields in '" + line + "'");
        ResultRow r;
        auto k = parse_kernel(f[0]);
        auto b = parse_backend(f[1]);
        if (!k || !b) throw std::runtime_error("csv: bad kernel or backend in '" + line + "'");
        r.kernel = *k;
        r.backend = *b;
        r.size_mb = std::stod(f[2]);
        r.threads = std::stoull(f[3]);
        r.cycles = std::stoull(f[4]);
        r.elapsed_ps = std::stoull(f[5]);
        r.energy_pj = std::stod(f[6]);
        r.speedup = std::stod(f[7]);
        r.energy_ratio = std::stod(f[8]);
        rows.push_back(r);
    }
    return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << render_csv(rows);
    if (!f) throw std::runtime_error("cannot write " + path);
}

std::string detail_dump(const SimStats& s, const EnergyConfig& e) {
    std::ostringstream o;
    auto kv = [&](const std::string& k, auto v) { o << k << " = " << v << "\n"; };
    auto energy = [&](const std::string& prefix, const EnergyBreakdown& b) {
        kv(prefix + ".l1_dyn_pj", fmt("%.3f", b.l1_dyn));
        kv(prefix + ".l2_dyn_pj", fmt("%.3f", b.l2_dyn));
        kv(prefix + ".llc_dyn_pj", fmt("%.3f", b.llc_dyn));
        kv(prefix + ".dram_dyn_pj", fmt("%.3f", b.dram_dyn));
        kv(prefix + ".vima_cache_dyn_pj", fmt("%.3f", b.vima_cache_dyn));
        kv(prefix + ".core_static_pj", fmt("%.3f", b.core_static));
        kv(prefix + ".l1_static_pj", fmt("%.3f", b.l1_static));
        kv(prefix + ".l2_static_pj", fmt("%.3f", b.l2_static));
        kv(prefix + ".llc_static_pj", fmt("%.3f", b.llc_static));
        kv(prefix + ".dram_static_pj", fmt("%.3f", b.dram_static));
        kv(prefix + ".vima_logic_static_pj", fmt("%.3f", b.vima_logic_static));
        kv(prefix + ".vima_cache_static_pj", fmt("%.3f", b.vima_cache_static));
        kv(prefix + ".total_pj", fmt("%.3f", b.total()));
    };

    kv("run.kernel", to_string(s.kernel));
    kv("run.backend", to_string(s.backend));
    kv("run.footprint_bytes", s.footprint_bytes);
    kv("run.threads", s.threads);
    kv("run.seed", s.seed);
    kv("run.elapsed_ps", s.elapsed.ps);
    kv("run.core_cycles", s.core_cycles);
    kv("run.faults", s.faults.size());
    for (std::size_t i = 0; i < s.faults.size(); ++i) kv("run.fault." + std::to_string(i), s.faults[i]);

    const auto& h = s.host;
    kv("host.ops", h.ops);
    kv("host.loads", h.loads);
    kv("host.stores", h.stores);
    kv("host.vima_ops", h.vima_ops);
    kv("host.l1_hits", h.l1_hits);
    kv("host.l1_misses", h.l1_misses);
    kv("host.l2_hits", h.l2_hits);
    kv("host.l2_misses", h.l2_misses);
    kv("host.llc_hits", h.llc_hits);
    kv("host.llc_misses", h.llc_misses);
    kv("host.l1_accesses", h.l1_accesses);
    kv("host.l2_accesses", h.l2_accesses);
    kv("host.llc_accesses", h.llc_accesses);
    kv("host.dram_line_reads", h.dram_line_reads);
    kv("host.dram_line_writes", h.dram_line_writes);
    kv("host.snoop_supplied", h.snoop_supplied);
    kv("host.mshr_stall_cycles", h.mshr_stall_cycles);
    kv("host.vima_wait_cycles", h.vima_wait_cycles);
    kv("host.max_issue_per_cycle", h.max_issue_per_cycle);
    kv("host.prologue_writebacks", h.prologue_writebacks);

    const auto& v = s.vima;
    kv("vima.instructions", v.instructions);
    kv("vima.exceptions", v.exceptions);
    kv("vima.tag_checks", v.tag_checks);
    kv("vima.hits", v.hits);
    kv("vima.misses", v.misses);
    kv("vima.evictions", v.evictions);
    kv("vima.dirty_evictions", v.dirty_evictions);
    kv("vima.snoop_supplies", v.snoop_supplies);
    kv("vima.snoop_invalidations", v.snoop_invalidations);
    kv("vima.snoop_writebacks", v.snoop_writebacks);
    kv("vima.read_subrequests", v.read_subrequests);
    kv("vima.write_subrequests", v.write_subrequests);
    kv("vima.cache_line_accesses", v.cache_line_accesses);
    kv("vima.operand_vectors", v.operand_vectors);
    kv("vima.fetched_bytes", v.fetched_bytes);
    kv("vima.fetch_time_ps", v.fetch_time.ps);
    kv("vima.gap_time_ps", v.gap_time.ps);
    kv("vima.busy_time_ps", v.busy_time.ps);

    kv("dram.reads_vima", s.dram.reads[DramCounters::idx(Origin::vima)]);
    kv("dram.writes_vima", s.dram.writes[DramCounters::idx(Origin::vima)]);
    kv("dram.reads_host", s.dram.reads[DramCounters::idx(Origin::host)]);
    kv("dram.writes_host", s.dram.writes[DramCounters::idx(Origin::host)]);
    kv("dram.read_busy_vima_ps", s.dram_read_busy_vima.ps);
    kv("dram.read_busy_host_ps", s.dram_read_busy_host.ps);
    kv("dram.read_bound_bytes_per_s", fmt("%.1f", s.dram_read_bound));
    kv("link.bytes", s.link_bytes);

    energy("energy", total_energy(s, e, scope_for(s, e, true)));
    energy("energy_no_dram_static", total_energy(s, e, scope_for(s, e, false)));
    return o.str();
}

}  // namespace vima
