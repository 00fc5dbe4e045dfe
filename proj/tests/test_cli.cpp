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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "vimasim/metrics.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(VIMASIM_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / ("vimasim_cli_" + std::to_string(::getpid()));
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("help exits 0") {
    CHECK(run("--help") == 0);
    CHECK(run("run --help") == 0);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run("") == 1);
    CHECK(run("run --kernel nope") == 1);
    CHECK(run("run --kernel vecsum --backend gpu") == 1);
    CHECK(run("sweep --kernel vecsum --param topology.vima_cache_bytes --values") == 1);
}

TEST_CASE("invalid configuration exits 2") {
    CHECK(run("run --kernel vecsum --size-mb 1 --set topology.vector_bytes=1000") == 2);
    CHECK(run("run --kernel vecsum --size-mb 1 --set topology.bogus=1") == 2);
    CHECK(run("run --kernel vecsum --size-mb 0.01") == 2);
    CHECK(run("sweep --kernel vecsum --size-mb 1 --param topology.vima_cache_bytes --values ''") == 2);
}

TEST_CASE("oracle mismatch exits 3 without a row") {
    TempDir d;
    const auto out = d.path / "m.csv";
    CHECK(run("compare --kernel memcopy --size-mb 1 --jobs 1 --inject-mismatch --out " + out.string()) == 3);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("simulated fault exits 4 without a row") {
    TempDir d;
    const auto out = d.path / "f.csv";
    CHECK(run("run --kernel vecsum --size-mb 1 --inject-fault 2 --out " + out.string()) == 4);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("run appends rows to one report") {
    TempDir d;
    const auto out = d.path / "r.csv";
    REQUIRE(run("run --kernel memset --size-mb 1 --out " + out.string()) == 0);
    REQUIRE(run("run --kernel memset --size-mb 1 --backend avx --threads 2 --out " + out.string()) == 0);
    const auto rows = vima::parse_csv(slurp(out));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].backend == vima::Backend::vima);
    CHECK(rows[1].threads == 2);
}

TEST_CASE("compare and sweep write parseable reports") {
    TempDir d;
    const auto c = d.path / "c.csv", s = d.path / "s.csv";
    REQUIRE(run("compare --kernel vecsum --size-mb 1 --jobs 1 --threads-list 2 --out " + c.string()) == 0);
    CHECK(vima::parse_csv(slurp(c)).size() == 3);
    REQUIRE(run("sweep --kernel vecsum --size-mb 1 --jobs 1 --param topology.vector_bytes --values 256,8192 --out " +
                s.string()) == 0);
    CHECK(vima::parse_csv(slurp(s)).size() == 2);
}

TEST_CASE("trace export round-trips through the decoder") {
    TempDir d;
    const auto t = d.path / "t.txt";
    REQUIRE(run("trace --kernel memset --size-mb 1 --out " + t.string()) == 0);
    const auto text = slurp(t);
    CHECK(text.find("MOV_IMM") != std::string::npos);
}

TEST_CASE("config files are read") {
    TempDir d;
    const auto cfg = d.path / "c.cfg";
    std::ofstream(cfg) << "topology.vima_cache_bytes = 131072\n";
    CHECK(run("run --kernel vecsum --size-mb 1 --config " + cfg.string()) == 0);
    std::ofstream(cfg) << "garbage line\n";
    CHECK(run("run --kernel vecsum --size-mb 1 --config " + cfg.string()) == 2);
}
