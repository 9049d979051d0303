#include <cmath>
#include <gtest/gtest.h>

#include <json.hpp>

#include "fixtures.hpp"

using namespace pvvasm;
using nlohmann::json;

namespace {

std::string cli() { return PVVASM_CLI; }

std::string lpf_job(const fixtures::TempDir& dir, const std::string& scorer) {
    fixtures::write_two_tone_dataset(dir.path() / "data", 4);
    const std::string path = dir.file("job.json");
    fixtures::write_text(path, R"({"mode": "transform", "dataset": "data/dataset.tsv",
        "transform": {"preset": "lpf"}, "scorer": ")" + scorer + R"("})");
    return path;
}

}  // namespace

TEST(Cli, Version) {
    const auto r = fixtures::run_command(cli() + " version");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.output, "pvvasm " PVVASM_VERSION "\n");
}

TEST(Cli, MissingJobIsConfigError) {
    const auto r = fixtures::run_command(cli() + " certify-transform --job /no/such/job.json --out /tmp/unused");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.output.find("/no/such/job.json"), std::string::npos);
}

TEST(Cli, BadOverrideIsConfigError) {
    fixtures::TempDir dir;
    const auto job = lpf_job(dir, "constant:0.1,0.9");
    const auto r = fixtures::run_command(cli() + " certify-transform --job " + job + " --out " + dir.file("o") +
                                        " --set budget.bogus=1");
    EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, ConstantScorerSmoke) {
    fixtures::TempDir dir;
    const auto job = lpf_job(dir, "constant:0.1,0.9");
    fixtures::write_text(dir.file("data/all.tsv"), "item0.wav\tbonafide\nitem2.wav\tbonafide\n");
    const auto r = fixtures::run_command(cli() + " certify-transform --job " + job + " --out " + dir.file("o") +
                                        " --set dataset=data/all.tsv --workers 2");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const json report = json::parse(fixtures::read_text(dir.file("o/report.txt")));
    EXPECT_EQ(report["pca"][1]["epsilon"], 1e-3);
    EXPECT_EQ(report["pca"][1]["pca"], 1.0);
    EXPECT_EQ(report["config"]["budget"]["alpha"], 1e-6);
}

TEST(Cli, OverridesEqualEditedJobAndSeedMatters) {
    fixtures::TempDir dir;
    const auto job = lpf_job(dir, "centroid:slope=-0.002,center=2000");
    const std::string base = cli() + " certify-transform --job " + job + " --workers 1 --out ";
    ASSERT_EQ(fixtures::run_command(base + dir.file("a") + " --set budget.n=60 --set budget.k=4").exit_code, 0);
    json edited = json::parse(fixtures::read_text(job));
    edited["budget"] = {{"n", 60}, {"k", 4}};
    fixtures::write_text(dir.file("edited.json"), edited.dump());
    ASSERT_EQ(fixtures::run_command(cli() + " certify-transform --job " + dir.file("edited.json") + " --out " +
                                   dir.file("b"))
                  .exit_code,
              0);
    EXPECT_EQ(fixtures::read_text(dir.file("a/report.txt")), fixtures::read_text(dir.file("b/report.txt")));
    EXPECT_EQ(fixtures::read_text(dir.file("a/report.csv")), fixtures::read_text(dir.file("b/report.csv")));
    ASSERT_EQ(fixtures::run_command(base + dir.file("c") + " --set budget.n=60 --set budget.k=4 --seed 77").exit_code,
              0);
    EXPECT_NE(fixtures::read_text(dir.file("a/report.csv")), fixtures::read_text(dir.file("c/report.csv")));
}

TEST(Cli, BridgeFailureExitsThree) {
    fixtures::TempDir dir;
    const auto job = lpf_job(dir, std::string("bridge@2000:") + PVVASM_ECHO_BRIDGE + " --bad-sum");
    const auto r = fixtures::run_command(cli() + " certify-transform --job " + job + " --out " + dir.file("o"));
    EXPECT_EQ(r.exit_code, 3) << r.output;
    EXPECT_NE(r.output.find("p_spoof"), std::string::npos);
}

TEST(Cli, ProbeScorer) {
    auto r = fixtures::run_command(cli() + " probe-scorer --scorer 'bridge:" + PVVASM_ECHO_BRIDGE + " --name probe'");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("name: bridge:probe"), std::string::npos);
    EXPECT_NE(r.output.find("deterministic: yes"), std::string::npos);
    r = fixtures::run_command(cli() + " probe-scorer --scorer 'bridge:" + PVVASM_ECHO_BRIDGE + " --bad-hello'");
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_NE(r.output.find("{\"hello\": 2}"), std::string::npos);
}

TEST(Cli, SweepWritesTables) {
    fixtures::TempDir dir;
    const auto job = lpf_job(dir, "energy:slope=0.2,center=-20");
    const auto r = fixtures::run_command(cli() + " sweep --job " + job + " --out " + dir.file("s") +
                                        " --set 'splits=[[60,1],[30,2],[10,6]]' --set transform.preset=gain");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const std::string table = fixtures::read_text(dir.file("s/sweep.csv"));
    EXPECT_EQ(table.substr(0, table.find('\n')), "n,k,mean_bound,mean_error_prob,pca@1.0000000000000001e-05,pca@0.001,pca@0.01,pca@0.050000000000000003");
    EXPECT_TRUE(std::filesystem::exists(dir.file("s/config_echo")));
}

TEST(Cli, ExportAugmentedClips) {
    fixtures::TempDir dir;
    const auto job = lpf_job(dir, "constant:0.1,0.9");
    const auto r = fixtures::run_command(cli() + " certify-transform --job " + job + " --out " + dir.file("o") +
                                        " --set budget.n=10 --set budget.k=2 --export-augmented " + dir.file("aug") +
                                        " --clip");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(std::filesystem::exists(dir.file("aug/0_item0.wav")));
}
