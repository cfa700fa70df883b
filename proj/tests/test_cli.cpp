#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <errbound/cli/commands.hpp>

#include "fixtures.hpp"

using namespace errbound;
using namespace errbound::cli;

namespace {

std::string corpus(const std::string& name) { return std::string(ERRBOUND_CORPUS_DIR) + "/" + name; }

struct run_result
{
    int code;
    std::string out;
    std::string err;
};

template <class Opt, class Fn>
run_result run(Fn fn, const Opt& o)
{
    std::ostringstream out, err;
    const int code = fn(o, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body)
{
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << body;
    return p.string();
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

} // namespace

TEST(SpecIo, ParsesCorpus)
{
    const auto s = load_system(corpus("ex1.json"));
    EXPECT_EQ(s.size(), 3u);
    EXPECT_EQ(s.dim(), 2);
    EXPECT_EQ(s.rows()[1].label, "2");
    EXPECT_EQ(s.rows()[1].b, 2.0);
}

TEST(SpecIo, RejectsBadDocuments)
{
    EXPECT_THROW(parse_system_text(R"({"space_dim": 2, "rows": []})"), error);
    EXPECT_THROW(parse_system_text(R"({"space_dim": 2, "rows": [{"label": "1", "a": [1, 0], "b": 0}], "extra": 1})"), error);
    EXPECT_THROW(parse_system_text(R"({"space_dim": 3, "rows": [{"label": "1", "a": [1, 0], "b": 0}]})"), error);
    EXPECT_THROW(parse_system_text(R"({"space_dim": 2, "norm": "l7", "rows": [{"label": "1", "a": [1, 0], "b": 0}]})"), error);
    EXPECT_THROW(parse_system_text(R"({"space_dim": 2, "rows": [{"label": "1", "a": [1, 0]}]})"), error);
    EXPECT_THROW(parse_system_text("{not json"), error);
    EXPECT_THROW(load_system(corpus("no_such_file.json")), error);
}

TEST(SpecIo, NormKey)
{
    const auto s = parse_system_text(R"({"space_dim": 1, "norm": "sup", "rows": [{"label": "x", "a": [2], "b": 1}]})");
    EXPECT_EQ(s.norm(), norm_kind::sup);
}

TEST(Format, ShortestRoundTrip)
{
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(fmt(ext_real::infinity()), "inf");
    EXPECT_EQ(fmt(fixtures::v2(1, -0.5)), "(1, -0.5)");
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(ext_real::infinity()), "inf");
}

TEST(Hoffman, Example1)
{
    hoffman_options o;
    o.path = corpus("ex1.json");
    const auto r = run(run_hoffman, o);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "active sets: 6\n"));
    EXPECT_TRUE(contains(r.out, "lower_bound: 0.7071067811865476 certified=yes"));
    EXPECT_TRUE(contains(r.out, "verdict: stable\n"));
    for (const char* j : {"J={1} ", "J={2} ", "J={3} ", "J={1,2} ", "J={1,3} ", "J={2,3} "}) {
        EXPECT_TRUE(contains(r.out, j)) << j;
    }
}

TEST(Hoffman, Example2)
{
    hoffman_options o;
    o.path = corpus("ex2.json");
    const auto r = run(run_hoffman, o);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "lower_bound: 0 certified=yes"));
    EXPECT_TRUE(contains(r.out, "verdict: unstable\n"));
}

TEST(Hoffman, EmptyRowsExitsOne)
{
    hoffman_options o;
    o.path = corpus("empty_rows.json");
    const auto r = run(run_hoffman, o);
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(Hoffman, EmptySolutionSetExitsTwo)
{
    hoffman_options o;
    o.path = temp_file("errbound_empty_s.json",
                       R"({"space_dim": 1, "rows": [{"label": "1", "a": [1], "b": -1}, {"label": "2", "a": [-1], "b": -1}]})");
    EXPECT_EQ(run(run_hoffman, o).code, 2);
}

TEST(Hoffman, SweepCsv)
{
    hoffman_options o;
    o.path = corpus("ex2.json");
    o.sweep = {0.1, 0.01};
    o.anchors = {"0,0"};
    o.directions = {"0,1"};
    o.samples = 300;
    const auto csv_path = (std::filesystem::temp_directory_path() / "errbound_sweep_test.csv").string();
    o.out = csv_path;
    const auto r = run(run_hoffman, o);
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(csv_path);
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, "eps,anchor_id,direction_id,lower_bound,sigma_sampled");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].rfind("0.01,0,0,0.00707106781186", 0), 0u);
    EXPECT_EQ(rows[1].rfind("0.10000000000000001,0,0,0.0707106781186", 0), 0u);
}

TEST(Hoffman, SweepCsvToStdout)
{
    hoffman_options o;
    o.path = corpus("halfspace.json");
    o.sweep = {0.0};
    o.samples = 100;
    const auto r = run(run_hoffman, o);
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "eps,anchor_id,direction_id,lower_bound,sigma_sampled\n"));
}

TEST(Hoffman, BadFlagsExitOne)
{
    hoffman_options o;
    o.path = corpus("ex1.json");
    o.max_size = 9;
    EXPECT_EQ(run(run_hoffman, o).code, 1);
    o.max_size = 0;
    o.sweep = {-0.1};
    EXPECT_EQ(run(run_hoffman, o).code, 1);
    o.sweep = {0.1};
    o.anchors = {"1,2,3"};
    EXPECT_EQ(run(run_hoffman, o).code, 1);
}

TEST(Phi, Examples)
{
    phi_options a;
    a.src.path = corpus("ex2.json");
    a.at = "0,0";
    auto r = run(run_phi, a);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "phi: 0\n"));
    EXPECT_TRUE(contains(r.out, "certified: yes\n"));

    phi_options b;
    b.src.function = "exp_minus_one";
    b.at = "0";
    r = run(run_phi, b);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "phi: -1\n"));

    phi_options c;
    c.src.path = corpus("ex1.json");
    c.at = "0,1";
    r = run(run_phi, c);
    EXPECT_TRUE(contains(r.out, "phi: -1.414213562373095"));
    EXPECT_TRUE(contains(r.out, "active_set: {1}\n"));
}

TEST(Phi, BadInputs)
{
    phi_options a;
    a.src.path = corpus("ex1.json");
    a.at = "0";
    EXPECT_EQ(run(run_phi, a).code, 1);
    a.at = "x,y";
    EXPECT_EQ(run(run_phi, a).code, 1);
    phi_options b;
    b.src.function = "cosh";
    b.at = "0";
    EXPECT_EQ(run(run_phi, b).code, 1);
}

TEST(Modulus, Examples)
{
    modulus_options a;
    a.src.function = "exp_minus_one";
    a.local = true;
    a.at = "0";
    auto r = run(run_modulus, a);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "route direct-ratio: value=1.0000"));
    EXPECT_TRUE(contains(r.out, "route primal-phi: value=1.0000"));

    modulus_options b;
    b.src.function = "zero";
    b.local = true;
    b.at = "0";
    r = run(run_modulus, b);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "route direct-ratio: value=inf "));
    EXPECT_TRUE(contains(r.out, "route primal-phi: value=inf "));

    modulus_options c;
    c.src.path = corpus("halfspace.json");
    r = run(run_modulus, c);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "route direct-ratio: value=4.99999999"));
    EXPECT_TRUE(contains(r.out, "route primal-phi: value=5 "));
}

TEST(Stability, Examples)
{
    stability_options a;
    a.src.path = corpus("ex2.json");
    a.at = "0,0";
    a.eps = 0.1;
    auto r = run(run_stability, a);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "verdict: unstable\n"));
    EXPECT_TRUE(contains(r.out, "destabilizer: eps=0.1"));

    stability_options b;
    b.src.function = "exp_minus_one";
    b.at = "0";
    r = run(run_stability, b);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "verdict: stable\n"));
    EXPECT_TRUE(contains(r.out, "phi_at_anchor: -1\n"));
    EXPECT_TRUE(contains(r.out, "note: tilts of magnitude"));

    stability_options c;
    c.src.function = "exp_minus_one";
    c.global = true;
    r = run(run_stability, c);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "interior slope condition: refuted"));
    EXPECT_TRUE(contains(r.out, "verdict: unstable\n"));
}

TEST(Stability, ModeFlagsExclusive)
{
    stability_options a;
    a.src.path = corpus("ex2.json");
    EXPECT_EQ(run(run_stability, a).code, 1);
    a.at = "1,0";
    EXPECT_EQ(run(run_stability, a).code, 1);
}

TEST(OracleCheck, Corpus)
{
    for (const char* name : {"ex1.json", "ex2.json", "halfspace.json"}) {
        oracle_check_options o;
        o.path = corpus(name);
        o.points = 50;
        const auto r = run(run_oracle_check, o);
        EXPECT_EQ(r.code, 0) << name << "\n" << r.out << r.err;
        EXPECT_TRUE(contains(r.out, "PASS")) << name;
    }
}

TEST(OracleCheck, CorruptedSpecExitsOne)
{
    oracle_check_options o;
    o.path = temp_file("errbound_corrupt.json", "{\"space_dim\": 2, \"rows\": [");
    EXPECT_EQ(run(run_oracle_check, o).code, 1);
}

TEST(Env, ThreadCapValidated)
{
    ::setenv("ERRBOUND_THREADS", "zero", 1);
    phi_options a;
    a.src.path = corpus("ex1.json");
    a.at = "0,1";
    EXPECT_EQ(run(run_phi, a).code, 1);
    ::setenv("ERRBOUND_THREADS", "4", 1);
    EXPECT_EQ(run(run_phi, a).code, 0);
    ::unsetenv("ERRBOUND_THREADS");
}

TEST(Determinism, ReportsRepeat)
{
    hoffman_options o;
    o.path = corpus("ex1.json");
    o.sweep = {0.05};
    o.samples = 200;
    EXPECT_EQ(run(run_hoffman, o).out, run(run_hoffman, o).out);
    modulus_options m;
    m.src.path = corpus("ex1.json");
    EXPECT_EQ(run(run_modulus, m).out, run(run_modulus, m).out);
}
