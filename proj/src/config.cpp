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

#include "vimasim/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace vima {

namespace {

constexpr std::array<std::pair<KernelId, std::string_view>, 7> kKernelNames{{
    {KernelId::memset, "memset"},
    {KernelId::memcopy, "memcopy"},
    {KernelId::vecsum, "vecsum"},
    {KernelId::stencil, "stencil"},
    {KernelId::matmult, "matmult"},
    {KernelId::knn, "knn"},
    {KernelId::mlp, "mlp"},
}};

constexpr std::array<std::pair<Backend, std::string_view>, 3> kBackendNames{{
    {Backend::scalar, "scalar"},
    {Backend::avx, "avx"},
    {Backend::vima, "vima"},
}};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        s.remove_prefix(2);
        base = 16;
    }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string render_double(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

struct KeyDef {
    std::string name;
    std::function<std::string(const SimConfig&)> get;
    std::function<bool(SimConfig&, std::string_view)> set;
};

template <typename Section, typename Field>
KeyDef u64_key(std::string name, Section SimConfig::*sec, Field Section::*field) {
    return KeyDef{std::move(name),
                  [=](const SimConfig& c) { return std::to_string(c.*sec.*field); },
                  [=](SimConfig& c, std::string_view v) {
                      auto n = parse_u64(v);
                      if (!n) return false;
                      c.*sec.*field = *n;
                      return true;
                  }};
}

template <typename Section>
KeyDef double_key(std::string name, Section SimConfig::*sec, double Section::*field) {
    return KeyDef{std::move(name),
                  [=](const SimConfig& c) { return render_double(c.*sec.*field); },
                  [=](SimConfig& c, std::string_view v) {
                      auto n = parse_double(v);
                      if (!n) return false;
                      c.*sec.*field = *n;
                      return true;
                  }};
}

template <typename Section>
KeyDef bool_key(std::string name, Section SimConfig::*sec, bool Section::*field) {
    return KeyDef{std::move(name),
                  [=](const SimConfig& c) { return std::string(c.*sec.*field ? "true" : "false"); },
                  [=](SimConfig& c, std::string_view v) {
                      if (v == "true" || v == "1") {
                          c.*sec.*field = true;
                      } else if (v == "false" || v == "0") {
                          c.*sec.*field = false;
                      } else {
                          return false;
                      }
                      return true;
                  }};
}

const std::vector<KeyDef>& registry() {
    static const std::vector<KeyDef> keys = [] {
        using S = SimConfig;
        using T = TopologyConfig;
        using M = TimingConfig;
        using H = HostConfig;
        using E = EnergyConfig;
        using W = WorkloadConfig;
        std::vector<KeyDef> k;
        k.push_back(u64_key("topology.vaults", &S::topology, &T::vaults));
        k.push_back(u64_key("topology.banks_per_vault", &S::topology, &T::banks_per_vault));
        k.push_back(u64_key("topology.row_buffer_bytes", &S::topology, &T::row_buffer_bytes));
        k.push_back(u64_key("topology.line_bytes", &S::topology, &T::line_bytes));
        k.push_back(u64_key("topology.vector_bytes", &S::topology, &T::vector_bytes));
        k.push_back(u64_key("topology.vima_cache_bytes", &S::topology, &T::vima_cache_bytes));
        k.push_back(u64_key("topology.links", &S::topology, &T::links));
        k.push_back(u64_key("topology.link_burst_bytes", &S::topology, &T::link_burst_bytes));
        k.push_back(u64_key("topology.capacity_bytes", &S::topology, &T::capacity_bytes));

        k.push_back(u64_key("timing.dram_cas", &S::timing, &M::dram_cas));
        k.push_back(u64_key("timing.dram_rp", &S::timing, &M::dram_rp));
        k.push_back(u64_key("timing.dram_rcd", &S::timing, &M::dram_rcd));
        k.push_back(u64_key("timing.dram_ras", &S::timing, &M::dram_ras));
        k.push_back(u64_key("timing.dram_cwd", &S::timing, &M::dram_cwd));
        k.push_back(u64_key("timing.core_freq", &S::timing, &M::core_freq));
        k.push_back(u64_key("timing.vima_freq", &S::timing, &M::vima_freq));
        k.push_back(u64_key("timing.dram_freq", &S::timing, &M::dram_freq));
        k.push_back(u64_key("timing.link_freq", &S::timing, &M::link_freq));
        k.push_back(u64_key("timing.vima_tag_cycles", &S::timing, &M::vima_tag_cycles));
        k.push_back(u64_key("timing.vima_cache_ports", &S::timing, &M::vima_cache_ports));
        k.push_back(u64_key("timing.vima_fill_lines_per_cycle", &S::timing, &M::vima_fill_lines_per_cycle));
        k.push_back(u64_key("timing.vima_int_alu", &S::timing, &M::vima_int_alu));
        k.push_back(u64_key("timing.vima_int_mul", &S::timing, &M::vima_int_mul));
        k.push_back(u64_key("timing.vima_int_div", &S::timing, &M::vima_int_div));
        k.push_back(u64_key("timing.vima_fp_alu", &S::timing, &M::vima_fp_alu));
        k.push_back(u64_key("timing.vima_fp_mul", &S::timing, &M::vima_fp_mul));
        k.push_back(u64_key("timing.vima_fp_div", &S::timing, &M::vima_fp_div));
        k.push_back(u64_key("timing.lanes", &S::timing, &M::lanes));
        k.push_back(u64_key("timing.l1_lat", &S::timing, &M::l1_lat));
        k.push_back(u64_key("timing.l2_lat", &S::timing, &M::l2_lat));
        k.push_back(u64_key("timing.llc_lat", &S::timing, &M::llc_lat));
        k.push_back(u64_key("timing.instruction_dispatch_lat", &S::timing, &M::instruction_dispatch_lat));
        k.push_back(u64_key("timing.rob_entries", &S::timing, &M::rob_entries));
        k.push_back(u64_key("timing.mob_read", &S::timing, &M::mob_read));
        k.push_back(u64_key("timing.mob_write", &S::timing, &M::mob_write));
        k.push_back(u64_key("timing.issue_width", &S::timing, &M::issue_width));

        k.push_back(u64_key("host.l1_bytes", &S::host, &H::l1_bytes));
        k.push_back(u64_key("host.l1_ways", &S::host, &H::l1_ways));
        k.push_back(u64_key("host.l2_bytes", &S::host, &H::l2_bytes));
        k.push_back(u64_key("host.l2_ways", &S::host, &H::l2_ways));
        k.push_back(u64_key("host.llc_bytes", &S::host, &H::llc_bytes));
        k.push_back(u64_key("host.llc_ways", &S::host, &H::llc_ways));
        k.push_back(u64_key("host.mshr_limit", &S::host, &H::mshr_limit));
        k.push_back(u64_key("host.load_units", &S::host, &H::load_units));
        k.push_back(u64_key("host.store_units", &S::host, &H::store_units));
        k.push_back(u64_key("host.int_alu_units", &S::host, &H::int_alu_units));
        k.push_back(u64_key("host.int_mul_units", &S::host, &H::int_mul_units));
        k.push_back(u64_key("host.int_div_units", &S::host, &H::int_div_units));
        k.push_back(u64_key("host.fp_alu_units", &S::host, &H::fp_alu_units));
        k.push_back(u64_key("host.fp_mul_units", &S::host, &H::fp_mul_units));
        k.push_back(u64_key("host.fp_div_units", &S::host, &H::fp_div_units));
        k.push_back(u64_key("host.int_alu_lat", &S::host, &H::int_alu_lat));
        k.push_back(u64_key("host.int_mul_lat", &S::host, &H::int_mul_lat));
        k.push_back(u64_key("host.int_div_lat", &S::host, &H::int_div_lat));
        k.push_back(u64_key("host.fp_alu_lat", &S::host, &H::fp_alu_lat));
        k.push_back(u64_key("host.fp_mul_lat", &S::host, &H::fp_mul_lat));
        k.push_back(u64_key("host.fp_div_lat", &S::host, &H::fp_div_lat));
        k.push_back(u64_key("host.fetch_buffer", &S::host, &H::fetch_buffer));
        k.push_back(u64_key("host.decode_buffer", &S::host, &H::decode_buffer));
        k.push_back(u64_key("host.btb_entries", &S::host, &H::btb_entries));

        k.push_back(double_key("energy.l1_line_pj", &S::energy, &E::l1_line_pj));
        k.push_back(double_key("energy.l2_line_pj", &S::energy, &E::l2_line_pj));
        k.push_back(double_key("energy.llc_line_pj", &S::energy, &E::llc_line_pj));
        k.push_back(double_key("energy.vima_cache_line_pj", &S::energy, &E::vima_cache_line_pj));
        k.push_back(double_key("energy.dram_x86_pj_per_bit", &S::energy, &E::dram_x86_pj_per_bit));
        k.push_back(double_key("energy.dram_vima_pj_per_bit", &S::energy, &E::dram_vima_pj_per_bit));
        k.push_back(double_key("energy.core_w", &S::energy, &E::core_w));
        k.push_back(double_key("energy.l1_w", &S::energy, &E::l1_w));
        k.push_back(double_key("energy.l2_w", &S::energy, &E::l2_w));
        k.push_back(double_key("energy.llc_w", &S::energy, &E::llc_w));
        k.push_back(double_key("energy.dram_w", &S::energy, &E::dram_w));
        k.push_back(double_key("energy.vima_logic_w", &S::energy, &E::vima_logic_w));
        k.push_back(double_key("energy.vima_cache_w", &S::energy, &E::vima_cache_w));
        k.push_back(bool_key("energy.idle_uncore_off", &S::energy, &E::idle_uncore_off));

        k.push_back(KeyDef{"workload.kernel",
                           [](const SimConfig& c) { return std::string(to_string(c.workload.kernel)); },
                           [](SimConfig& c, std::string_view v) {
                               auto kid = parse_kernel(v);
                               if (!kid) return false;
                               c.workload.kernel = *kid;
                               return true;
                           }});
        k.push_back(KeyDef{"workload.backend",
                           [](const SimConfig& c) { return std::string(to_string(c.workload.backend)); },
                           [](SimConfig& c, std::string_view v) {
                               auto b = parse_backend(v);
                               if (!b) return false;
                               c.workload.backend = *b;
                               return true;
                           }});
        k.push_back(u64_key("workload.footprint_bytes", &S::workload, &W::footprint_bytes));
        k.push_back(u64_key("workload.threads", &S::workload, &W::threads));
        k.push_back(u64_key("workload.seed", &S::workload, &W::seed));
        k.push_back(u64_key("workload.knn_k", &S::workload, &W::knn_k));
        k.push_back(u64_key("workload.knn_train", &S::workload, &W::knn_train));
        k.push_back(u64_key("workload.knn_test", &S::workload, &W::knn_test));
        k.push_back(u64_key("workload.knn_features", &S::workload, &W::knn_features));
        k.push_back(u64_key("workload.mlp_instances", &S::workload, &W::mlp_instances));
        k.push_back(u64_key("workload.mlp_features", &S::workload, &W::mlp_features));
        k.push_back(u64_key("workload.mlp_outputs", &S::workload, &W::mlp_outputs));
        k.push_back(u64_key("workload.max_outer", &S::workload, &W::max_outer));
        return k;
    }();
    return keys;
}

const KeyDef* find_key(std::string_view name) {
    for (const auto& k : registry())
        if (k.name == name) return &k;
    return nullptr;
}

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

std::string_view to_string(KernelId k) {
    for (auto [id, name] : kKernelNames)
        if (id == k) return name;
    return "?";
}

std::string_view to_string(Backend b) {
    for (auto [id, name] : kBackendNames)
        if (id == b) return name;
    return "?";
}

std::optional<KernelId> parse_kernel(std::string_view s) {
    for (auto [id, name] : kKernelNames)
        if (name == s) return id;
    return std::nullopt;
}

std::optional<Backend> parse_backend(std::string_view s) {
    for (auto [id, name] : kBackendNames)
        if (name == s) return id;
    return std::nullopt;
}

const std::vector<KernelId>& all_kernels() {
    static const std::vector<KernelId> v = [] {
        std::vector<KernelId> out;
        for (auto [id, name] : kKernelNames) out.push_back(id);
        return out;
    }();
    return v;
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& v : violations) msg += "\n  " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<std::string> validate(const SimConfig& cfg) {
    std::vector<std::string> errs;
    auto need = [&](bool ok, std::string msg) {
        if (!ok) errs.push_back(std::move(msg));
    };
    const auto& t = cfg.topology;
    need(is_pow2(t.vaults), "topology.vaults must be a power of two");
    need(is_pow2(t.banks_per_vault), "topology.banks_per_vault must be a power of two");
    need(t.line_bytes > 0 && is_pow2(t.line_bytes), "topology.line_bytes must be a power of two");
    need(t.line_bytes > 0 && t.vector_bytes > 0 && t.vector_bytes % t.line_bytes == 0,
         "topology.vector_bytes must be a positive multiple of topology.line_bytes");
    need(is_pow2(t.vector_bytes), "topology.vector_bytes must be a power of two");
    need(t.vector_bytes > 0 && t.vima_cache_bytes > 0 && t.vima_cache_bytes % t.vector_bytes == 0,
         "topology.vima_cache_bytes must be a positive multiple of topology.vector_bytes");
    need(t.vector_bytes == 0 || t.vima_cache_bytes / t.vector_bytes >= 4,
         "topology.vima_cache_bytes must hold at least 4 vectors (two unaligned sources)");
    need(t.line_bytes > 0 && t.row_buffer_bytes >= t.line_bytes && t.row_buffer_bytes % t.line_bytes == 0,
         "topology.row_buffer_bytes must be a multiple of topology.line_bytes");
    need(t.links > 0, "topology.links must be > 0");
    need(t.link_burst_bytes > 0, "topology.link_burst_bytes must be > 0");
    need(t.capacity_bytes > 0 && t.line_bytes > 0 && t.capacity_bytes % t.line_bytes == 0,
         "topology.capacity_bytes must be a positive multiple of topology.line_bytes");

    const auto& m = cfg.timing;
    const std::pair<const char*, std::uint64_t> positive[] = {
        {"timing.dram_cas", m.dram_cas},
        {"timing.dram_rp", m.dram_rp},
        {"timing.dram_rcd", m.dram_rcd},
        {"timing.dram_ras", m.dram_ras},
        {"timing.dram_cwd", m.dram_cwd},
        {"timing.core_freq", m.core_freq},
        {"timing.vima_freq", m.vima_freq},
        {"timing.dram_freq", m.dram_freq},
        {"timing.link_freq", m.link_freq},
        {"timing.vima_tag_cycles", m.vima_tag_cycles},
        {"timing.vima_cache_ports", m.vima_cache_ports},
        {"timing.vima_int_alu", m.vima_int_alu},
        {"timing.vima_int_mul", m.vima_int_mul},
        {"timing.vima_int_div", m.vima_int_div},
        {"timing.vima_fp_alu", m.vima_fp_alu},
        {"timing.vima_fp_mul", m.vima_fp_mul},
        {"timing.vima_fp_div", m.vima_fp_div},
        {"timing.lanes", m.lanes},
        {"timing.l1_lat", m.l1_lat},
        {"timing.l2_lat", m.l2_lat},
        {"timing.llc_lat", m.llc_lat},
        {"timing.instruction_dispatch_lat", m.instruction_dispatch_lat},
        {"timing.rob_entries", m.rob_entries},
        {"timing.mob_read", m.mob_read},
        {"timing.mob_write", m.mob_write},
        {"timing.issue_width", m.issue_width},
    };
    for (auto [name, v] : positive) need(v > 0, std::string(name) + " must be > 0");
    need(m.core_freq <= 1'000'000'000'000ULL && m.vima_freq <= 1'000'000'000'000ULL &&
             m.dram_freq <= 1'000'000'000'000ULL && m.link_freq <= 1'000'000'000'000ULL,
         "timing frequencies must not exceed 1 THz");

    const auto& h = cfg.host;
    need(h.l1_ways > 0 && h.l1_bytes % std::max<std::uint64_t>(h.l1_ways * t.line_bytes, 1) == 0 &&
             h.l1_bytes > 0,
         "host.l1_bytes must be a positive multiple of host.l1_ways * line_bytes");
    need(h.l2_ways > 0 && h.l2_bytes % std::max<std::uint64_t>(h.l2_ways * t.line_bytes, 1) == 0 &&
             h.l2_bytes > 0,
         "host.l2_bytes must be a positive multiple of host.l2_ways * line_bytes");
    need(h.llc_ways > 0 && h.llc_bytes % std::max<std::uint64_t>(h.llc_ways * t.line_bytes, 1) == 0 &&
             h.llc_bytes > 0,
         "host.llc_bytes must be a positive multiple of host.llc_ways * line_bytes");
    need(h.l1_bytes <= h.l2_bytes && h.l2_bytes <= h.llc_bytes, "host cache capacities must grow L1 <= L2 <= LLC");
    need(h.mshr_limit > 0, "host.mshr_limit must be > 0");
    const std::pair<const char*, std::uint64_t> units[] = {
        {"host.load_units", h.load_units},       {"host.store_units", h.store_units},
        {"host.int_alu_units", h.int_alu_units}, {"host.int_mul_units", h.int_mul_units},
        {"host.int_div_units", h.int_div_units}, {"host.fp_alu_units", h.fp_alu_units},
        {"host.fp_mul_units", h.fp_mul_units},   {"host.fp_div_units", h.fp_div_units},
        {"host.int_alu_lat", h.int_alu_lat},     {"host.int_mul_lat", h.int_mul_lat},
        {"host.int_div_lat", h.int_div_lat},     {"host.fp_alu_lat", h.fp_alu_lat},
        {"host.fp_mul_lat", h.fp_mul_lat},       {"host.fp_div_lat", h.fp_div_lat},
    };
    for (auto [name, v] : units) need(v > 0, std::string(name) + " must be > 0");

    const auto& e = cfg.energy;
    const std::pair<const char*, double> energies[] = {
        {"energy.l1_line_pj", e.l1_line_pj},
        {"energy.l2_line_pj", e.l2_line_pj},
        {"energy.llc_line_pj", e.llc_line_pj},
        {"energy.vima_cache_line_pj", e.vima_cache_line_pj},
        {"energy.dram_x86_pj_per_bit", e.dram_x86_pj_per_bit},
        {"energy.dram_vima_pj_per_bit", e.dram_vima_pj_per_bit},
        {"energy.core_w", e.core_w},
        {"energy.l1_w", e.l1_w},
        {"energy.l2_w", e.l2_w},
        {"energy.llc_w", e.llc_w},
        {"energy.dram_w", e.dram_w},
        {"energy.vima_logic_w", e.vima_logic_w},
        {"energy.vima_cache_w", e.vima_cache_w},
    };
    for (auto [name, v] : energies) need(v >= 0.0, std::string(name) + " must be non-negative");

    const auto& w = cfg.workload;
    need(w.footprint_bytes > 0, "workload.footprint_bytes must be > 0");
    need(w.threads == 1 || w.threads == 2 || w.threads == 4 || w.threads == 8 || w.threads == 16 ||
             w.threads == 32,
         "workload.threads must be one of 1,2,4,8,16,32");
    need(w.knn_k > 0 && w.knn_k <= w.knn_train, "workload.knn_k must be in [1, knn_train]");
    need(w.knn_test > 0, "workload.knn_test must be > 0");
    need(w.knn_train > 0, "workload.knn_train must be > 0");
    need(w.mlp_instances > 0, "workload.mlp_instances must be > 0");
    need(w.mlp_outputs > 0, "workload.mlp_outputs must be > 0");
    return errs;
}

void set_key(SimConfig& cfg, std::string_view key, std::string_view value) {
    const KeyDef* def = find_key(key);
    if (!def) throw ConfigError(0, "unknown key '" + std::string(key) + "'");
    if (!def->set(cfg, trim(value)))
        throw ConfigError(0, "bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

void apply_override(SimConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(0, "override '" + std::string(assignment) + "' is not of the form key=value");
    set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string get_key(const SimConfig& cfg, std::string_view key) {
    const KeyDef* def = find_key(key);
    if (!def) throw ConfigError(0, "unknown key '" + std::string(key) + "'");
    return def->get(cfg);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : registry()) out.push_back(k.name);
    return out;
}

SimConfig parse_config(std::string_view text) {
    SimConfig cfg;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(lineno, "expected 'section.key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.find('.') == std::string_view::npos)
            throw ConfigError(lineno, "key '" + std::string(key) + "' has no section");
        const KeyDef* def = find_key(key);
        if (!def) throw ConfigError(lineno, "unknown key '" + std::string(key) + "'");
        if (!def->set(cfg, value))
            throw ConfigError(lineno, "bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
    }
    if (auto errs = validate(cfg); !errs.empty()) throw ValidationError(std::move(errs));
    return cfg;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const SimConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& k : registry()) {
        const auto sec = k.name.substr(0, k.name.find('.'));
        if (sec != section) {
            if (!section.empty()) out += '\n';
            out += "# " + sec + "\n";
            section = sec;
        }
        out += k.name + " = " + k.get(cfg) + "\n";
    }
    return out;
}

std::uint64_t vima_cache_lines(const TopologyConfig& t) { return t.vima_cache_bytes / t.vector_bytes; }

std::uint64_t lines_per_vector(const TopologyConfig& t) { return t.vector_bytes / t.line_bytes; }

std::uint64_t elements_per_vector(const TopologyConfig& t, std::uint64_t element_bytes) {
    return t.vector_bytes / element_bytes;
}

std::uint64_t transfer_beats(const TopologyConfig& t, const TimingConfig& tm) {
    const std::uint64_t elems = elements_per_vector(t, 4);
    return std::max<std::uint64_t>(1, (elems + tm.lanes - 1) / tm.lanes);
}

std::uint64_t dram_burst_cycles(const TopologyConfig& t) {
    const std::uint64_t per_cycle = 2 * t.link_burst_bytes;
    return (t.line_bytes + per_cycle - 1) / per_cycle;
}

}  // namespace vima
