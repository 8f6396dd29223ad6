#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

using json = nlohmann::json;

namespace {

struct CliRun {
    int rc = -1;
    std::string out;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(DIFFCOND_CLI) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int st = pclose(pipe);
    r.rc = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string demo(const std::string& name) { return std::string(DIFFCOND_DEMOS) + "/" + name; }

std::string kind_of(const std::string& file) {
    std::ifstream in(file);
    return json::parse(in).at("kind").get<std::string>();
}

}  // namespace

TEST(Cli, DemoJobsPass) {
    for (const char* name : {"conductor_b_s2.json", "fierce.json", "tensor.json", "compare.json", "groebner.json",
                             "idempotent.json", "thickening.json", "as_ts.json", "suite.json"}) {
        const std::string f = demo(name);
        CliRun r = run(kind_of(f) + " --input " + f);
        ASSERT_EQ(r.rc, 0) << name << "\n" << r.out;
        json doc = json::parse(r.out);
        EXPECT_EQ(doc.at("verdict"), "PASS") << name;
        EXPECT_EQ(doc.at("job").at("kind"), kind_of(f));
    }
}

TEST(Cli, ByteStableOutput) {
    const std::string f = demo("compare.json");
    CliRun a = run("compare --input " + f), b = run("compare --input " + f);
    EXPECT_EQ(a.rc, 0);
    EXPECT_EQ(a.out, b.out);
    CliRun s1 = run("suite --seed 7 --size 30"), s2 = run("suite --seed 7 --size 30");
    EXPECT_EQ(s1.out, s2.out);
}

TEST(Cli, ConductorFromFlags) {
    CliRun r = run("conductor --p 3 --f 'b*s^-2'");
    ASSERT_EQ(r.rc, 0);
    json res = json::parse(r.out).at("results");
    EXPECT_EQ(res.at("swan").at("value"), "2/1");
    EXPECT_EQ(res.at("artin").at("value"), "3/1");
    CliRun fierce = run("conductor --p 3 --f 'b*s^-3'");
    json rf = json::parse(fierce.out).at("results");
    EXPECT_EQ(rf.at("swan").at("value"), "3/1");
    EXPECT_EQ(rf.at("artin").at("value"), "3/1");
}

TEST(Cli, CsvHeader) {
    CliRun r = run("compare --format csv --input " + demo("compare.json"));
    ASSERT_EQ(r.rc, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "f,swan,artin,oracle,verdict");
    std::istringstream is(r.out);
    std::string line;
    int rows = 0;
    std::getline(is, line);
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_NE(line.find("PASS"), std::string::npos) << line;
    }
    EXPECT_GT(rows, 0);
}

TEST(Cli, IdempotentExample) {
    CliRun r = run("idempotent --input " + demo("idempotent.json"));
    ASSERT_EQ(r.rc, 0);
    json res = json::parse(r.out).at("results");
    EXPECT_EQ(res.at("components"), 2);
    std::set<std::string> idem;
    for (const auto& e : res.at("idempotents")) idem.insert(e.get<std::string>());
    EXPECT_EQ(idem, (std::set<std::string>{"0", "1", "u", "u + 1"}));
    EXPECT_TRUE(res.at("orthogonal").get<bool>());
    EXPECT_TRUE(res.at("sum_to_one").get<bool>());
}

TEST(Cli, OutputFile) {
    const auto path = std::filesystem::temp_directory_path() / "diffcond_cli_out.json";
    std::filesystem::remove(path);
    CliRun r = run("conductor --p 2 --f 'b*s^-3' --output " + path.string());
    ASSERT_EQ(r.rc, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    EXPECT_EQ(json::parse(in).at("verdict"), "PASS");
    std::filesystem::remove(path);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("suite --size 0").rc, 2);
    EXPECT_EQ(run("suite --size 40 --mutate rotate-sign").rc, 1);
    EXPECT_EQ(run("conductor --p 4 --f 's^-1'").rc, 2);
    EXPECT_EQ(run("conductor --p 3 --f 'b*s^-'").rc, 2);
    EXPECT_EQ(run("conductor --input /nonexistent/job.json").rc, 2);
    EXPECT_EQ(run("nosuchkind").rc, 2);
    EXPECT_EQ(run("conductor --input " + demo("suite.json")).rc, 2);
    EXPECT_EQ(run("thickening-check --p 3 --f 'b*s^-2' --n-max 4").rc, 0);
}
