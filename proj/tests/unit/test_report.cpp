#include <cmath>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pvvasm/report.hpp"

using namespace pvvasm;
using nlohmann::json;

namespace {

VerificationReport sample_report() {
    VerificationReport r;
    r.scorer_name = "constant";
    r.epsilon_grid = {1e-3, 0.05};
    r.pca = {0.0, 0.5};
    r.mean_bound = 0.01;
    r.mean_error_prob = 0.0;
    r.config = default_job_document();
    ItemResult a;
    a.id = "a.wav";
    a.label = Label::BonaFide;
    a.initial = Label::BonaFide;
    a.counted_correct = true;
    Certificate c;
    c.bound = 0.01;
    c.t_star = -50.0;
    c.c_tilde = std::numeric_limits<double>::infinity();
    c.error_prob = 1.0;
    a.certificate = c;
    a.certified = {false, true};
    ItemResult b;
    b.id = "b,c.wav";
    b.error = "cannot open";
    b.certified = {false, false};
    r.items = {a, b};
    return r;
}

}  // namespace

TEST(Report, JsonStructure) {
    const json j = report_to_json(sample_report());
    EXPECT_EQ(j["pca"][1]["epsilon"], 0.05);
    EXPECT_EQ(j["pca"][1]["pca"], 0.5);
    EXPECT_TRUE(j["items"][0]["c_tilde"].is_null());
    EXPECT_EQ(j["items"][1]["error"], "cannot open");
    EXPECT_EQ(j["config"]["budget"]["n"], 1000);
}

TEST(Report, CsvColumns) {
    const std::string csv = report_to_csv(sample_report());
    EXPECT_EQ(csv,
              "item,bound,t_star,c_hat,c_tilde,error_prob,certified@0.001,certified@0.050000000000000003\n"
              "a.wav,0.01,-50,0,inf,1,0,1\n"
              "\"b,c.wav\",,,,,,0,0\n");
}

TEST(Report, WritesFixedFileNamesAtomically) {
    fixtures::TempDir dir;
    const std::string out = dir.file("out/nested");
    write_report(out, sample_report());
    for (const char* name : {"report.txt", "report.csv", "config_echo"}) {
        EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(out) / name)) << name;
    }
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(out)) ++files;
    EXPECT_EQ(files, 3u);
    EXPECT_EQ(json::parse(fixtures::read_text(out + "/config_echo")), default_job_document());
}
