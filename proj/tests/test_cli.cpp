// Copyright 2025 The qnm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

std::string g_binary;

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

double last_number(const std::string& text) {
    // last non-empty line parsed as a double
    size_t end = text.find_last_not_of("\n \t");
    REQUIRE(end != std::string::npos);
    size_t start = text.find_last_of('\n', end);
    start = (start == std::string::npos) ? 0 : start + 1;
    return std::stod(text.substr(start, end - start + 1));
}

} // namespace

TEST_CASE("qfi subcommand prints the vacuum value") {
    const auto res = run_cli("qfi --state vacuum --sigma 0.1 --dim 40");
    CHECK(res.exit_code == 0);
    CHECK(last_number(res.output) == doctest::Approx(2.0 / 1.01).epsilon(1e-8));
    CHECK(res.output.find("# qnm") != std::string::npos); // versioned header
}

TEST_CASE("bounds eval and list") {
    CHECK(last_number(run_cli("bounds eval --name ecqfi_lossy --sigma 0 --eta 0.1").output) ==
          doctest::Approx(20.0));
    CHECK(last_number(run_cli("bounds eval --name qfi_fock --N 8 --eta 0.1").output) ==
          doctest::Approx(7.748).epsilon(1e-3));
    CHECK(last_number(run_cli("bounds eval --name ub_lossy_constrained --sigma 0.1 --eta 0.2 --N inf").output) ==
          doctest::Approx(2.0 / 0.21).epsilon(1e-9));
    const auto list = run_cli("bounds list");
    CHECK(list.exit_code == 0);
    CHECK(list.output.find("ecqfi_lossless") != std::string::npos);
    // divergent sentinel is a config error
    CHECK(run_cli("bounds eval --name qfi_tmsv_perp --N inf").exit_code == 2);
}

TEST_CASE("sweep validation and determinism") {
    CHECK(run_cli("sweep --sigma 0").exit_code == 2);       // no grid
    CHECK(run_cli("sweep --sigma-grid ,").exit_code == 2);  // empty grid
    CHECK(run_cli("qfi --dim 1").exit_code == 2);
    CHECK(run_cli("qfi --dim 99999").exit_code == 2);       // above the ceiling

    const std::string args =
        "sweep --state fock --n 2 --sigma-grid 0.1,0.3 --eta 0.05 --dim 40 --out /tmp/qnm_sweep_";
    const auto a = run_cli(args + "a.csv");
    const auto b = run_cli(args + "b.csv");
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    std::ifstream fa("/tmp/qnm_sweep_a.csv"), fb("/tmp/qnm_sweep_b.csv");
    std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ca == cb); // byte-stable given identical config
    CHECK(ca.find("state,N,sigma,eta,qfi,cfi_number,cfi_quadrature,leakage,dim,deriv_method") !=
          std::string::npos);
}

TEST_CASE("config file layering") {
    {
        std::ofstream cfg("/tmp/qnm_cfg.json");
        cfg << R"({"sigma": 0.5, "dim": 40})";
    }
    // config supplies sigma, flag overrides dim
    const auto res = run_cli("qfi --state vacuum --config /tmp/qnm_cfg.json --dim 50");
    CHECK(res.exit_code == 0);
    CHECK(last_number(res.output) == doctest::Approx(2.0 / 1.25).epsilon(1e-8));
    CHECK(res.output.find("\"dim\":50") != std::string::npos);
    CHECK(run_cli("qfi --config /nonexistent.json").exit_code == 2);
}

TEST_CASE("protocol emits the CSV contract") {
    const auto res = run_cli(
        "protocol --sigma 0.05 --ratios 0.5 --M-grid 200 --trials 20 --seed 3 --out /tmp/qnm_proto.csv");
    CHECK(res.exit_code == 0);
    std::ifstream f("/tmp/qnm_proto.csv");
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(content.find("M,scheme,mu_over_sigma,mse_sigma,mse_mu,stderr,clamp_rate") !=
          std::string::npos);
    CHECK(content.find("nonadaptive") != std::string::npos);
    CHECK(content.find("adaptive") != std::string::npos);
    CHECK(run_cli("protocol --sigma 0.05 --M-grid 7 --trials 5").exit_code == 2); // odd M
}

TEST_CASE("waveform subcommand") {
    {
        std::ofstream model("/tmp/qnm_model.csv");
        model << "# omega,gain,phi\n1.0,2.0,0.5\n2.0,1.0,1.0\n";
    }
    const auto res = run_cli("waveform --model /tmp/qnm_model.csv --alpha 1.0");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("per_frequency_qfi") != std::string::npos);
    CHECK(run_cli("waveform --model /missing.csv").exit_code == 2);
}

TEST_CASE("optimize subcommand writes a run artifact") {
    const auto res = run_cli(
        "optimize --spacing 5 --peaks 4 --sigma 0.01 --eta 0.1 --dim 40 --particles 8 --iters 5 "
        "--seed 11 --out /tmp/qnm_opt.json");
    CHECK(res.exit_code == 0);
    std::ifstream f("/tmp/qnm_opt.json");
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(content.find("\"history\"") != std::string::npos);
    CHECK(content.find("\"best_state\"") != std::string::npos);
    CHECK(content.find("\"seed\":11") != std::string::npos);
    CHECK(run_cli("optimize --spacing 20 --peaks 24 --dim 100").exit_code == 2); // lattice too big
}

TEST_CASE("unknown flags and missing subcommand fail with exit 2") {
    CHECK(run_cli("qfi --bogus 3").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
}

int main(int argc, char** argv) {
    if (argc > 1) g_binary = argv[argc - 1];
    if (g_binary.empty() || g_binary.find("--") == 0) {
        std::fprintf(stderr, "usage: test_cli <path-to-qnm>\n");
        return 1;
    }
    doctest::Context ctx;
    ctx.applyCommandLine(argc - 1, argv);
    return ctx.run();
}
