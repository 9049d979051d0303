#include "pvvasm/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "pvvasm/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pvvasm {

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json item_json(const ItemResult& item, const std::vector<double>& grid) {
    json j;
    j["id"] = item.id;
    j["label"] = item.label ? json(to_string(*item.label)) : json(nullptr);
    j["initial"] = item.initial ? json(to_string(*item.initial)) : json(nullptr);
    j["counted_correct"] = item.counted_correct;
    if (item.certificate) {
        const Certificate& c = *item.certificate;
        j["direction"] = to_string(c.direction);
        j["bound"] = number(c.bound);
        j["t_star"] = number(c.t_star);
        j["c_hat"] = number(c.c_hat);
        j["c_tilde"] = number(c.c_tilde);
        j["error_prob"] = number(c.error_prob);
        j["error_prob_limit"] = number(c.error_prob_limit);
        j["cv_method"] = to_string(c.cv_method);
        j["degenerate"] = c.degenerate;
    } else {
        j["error"] = item.error;
    }
    json cert = json::array();
    for (std::size_t e = 0; e < grid.size(); ++e) cert.push_back({{"epsilon", grid[e]}, {"certified", bool(item.certified[e])}});
    j["certificates"] = cert;
    return j;
}

}  // namespace

json report_to_json(const VerificationReport& r) {
    json j;
    j["mode"] = to_string(r.mode);
    j["scorer"] = r.scorer_name;
    if (r.split) j["split"] = {{"n", r.split->first}, {"k", r.split->second}};
    json pca = json::array();
    for (std::size_t e = 0; e < r.epsilon_grid.size(); ++e) {
        json row{{"epsilon", r.epsilon_grid[e]}, {"pca", r.pca[e]}};
        if (r.binary_pca) row["binary_pca"] = bool((*r.binary_pca)[e]);
        pca.push_back(row);
    }
    j["pca"] = pca;
    j["mean_bound"] = number(r.mean_bound);
    j["mean_error_prob"] = number(r.mean_error_prob);
    j["items"] = json::array();
    for (const auto& item : r.items) j["items"].push_back(item_json(item, r.epsilon_grid));
    j["config"] = r.config;
    return j;
}

std::string report_to_csv(const VerificationReport& r) {
    std::string out = "item,bound,t_star,c_hat,c_tilde,error_prob";
    for (double e : r.epsilon_grid) out += ",certified@" + fmt(e);
    out += '\n';
    for (const auto& item : r.items) {
        out += csv_field(item.id);
        if (item.certificate) {
            const Certificate& c = *item.certificate;
            for (double v : {c.bound, c.t_star, c.c_hat, c.c_tilde, c.error_prob}) out += "," + fmt(v);
        } else {
            out += ",,,,,";
        }
        for (bool b : item.certified) out += b ? ",1" : ",0";
        out += '\n';
    }
    return out;
}

std::string sweep_to_csv(const std::vector<VerificationReport>& reports) {
    std::string out = "n,k,mean_bound,mean_error_prob";
    if (!reports.empty()) {
        for (double e : reports.front().epsilon_grid) out += ",pca@" + fmt(e);
    }
    out += '\n';
    for (const auto& r : reports) {
        out += r.split ? std::to_string(r.split->first) + "," + std::to_string(r.split->second) : ",";
        out += "," + fmt(r.mean_bound) + "," + fmt(r.mean_error_prob);
        for (double p : r.pca) out += "," + fmt(p);
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("failed writing " + tmp);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot rename " + tmp + " to " + path);
    }
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
}

}  // namespace

void write_report(const std::string& dir, const VerificationReport& report) {
    ensure_dir(dir);
    const fs::path d(dir);
    write_file_atomic((d / "report.txt").string(), report_to_json(report).dump(2) + "\n");
    write_file_atomic((d / "report.csv").string(), report_to_csv(report));
    write_file_atomic((d / "config_echo").string(), report.config.dump(2) + "\n");
}

void write_sweep(const std::string& dir, const std::vector<VerificationReport>& reports) {
    if (reports.empty()) throw ConfigError("sweep produced no reports");
    ensure_dir(dir);
    const fs::path d(dir);
    json doc;
    doc["sweep"] = json::array();
    std::string csv;
    for (const auto& r : reports) {
        json j = report_to_json(r);
        j.erase("config");
        doc["sweep"].push_back(std::move(j));
        std::string part = report_to_csv(r);
        const auto header_end = part.find('\n');
        if (csv.empty()) csv = "n,k," + part.substr(0, header_end + 1);
        std::size_t pos = header_end + 1;
        while (pos < part.size()) {
            const auto eol = part.find('\n', pos);
            csv += std::to_string(r.split->first) + "," + std::to_string(r.split->second) + "," +
                   part.substr(pos, eol - pos + 1);
            pos = eol + 1;
        }
    }
    doc["config"] = reports.front().config;
    write_file_atomic((d / "report.txt").string(), doc.dump(2) + "\n");
    write_file_atomic((d / "report.csv").string(), csv);
    write_file_atomic((d / "sweep.csv").string(), sweep_to_csv(reports));
    write_file_atomic((d / "config_echo").string(), reports.front().config.dump(2) + "\n");
}

}  // namespace pvvasm
