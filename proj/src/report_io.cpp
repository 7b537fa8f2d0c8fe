#include "ovtk/report_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ovtk/errors.hpp"
#include "ovtk/fmt.hpp"

namespace ovtk {
namespace {

namespace fs = std::filesystem;

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InputError("failed while writing '" + path.string() + "'");
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& line : split_lines(text)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream in(line);
        while (std::getline(in, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(std::move(cells));
    }
    return rows;
}

/// First occurrence wins, so the run-level keys shadow the config echo below them.
std::map<std::string, std::string> parse_metadata(const std::string& text) {
    std::map<std::string, std::string> kv;
    for (auto line : split_lines(text)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
                s.pop_back();
            return s;
        };
        kv.emplace(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

/// Space-padded columns, two-space gap, last column unpadded.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::size_t n_cols = 0;
    for (const auto& r : rows) n_cols = std::max(n_cols, r.size());
    std::vector<std::size_t> width(n_cols, 0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
    std::string out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) line += "  ";
            line += r[j];
            if (j + 1 < r.size()) line.append(width[j] - r[j].size(), ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out += "\n";
    }
    return out;
}

std::string meta_value(const std::map<std::string, std::string>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InputError("metadata.txt: missing key '" + key + "'");
    return it->second;
}

}  // namespace

void write_report(const CertificateReport& report, const RunConfig& cfg, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(fs::path(dir), ec);
    if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
    const fs::path d(dir);

    std::string gs = "challenger_id,T,gamma,gamma_ci95,gap,gap_ci95,slack\n";
    for (const auto& ch : report.challengers) {
        for (std::size_t i = 0; i < report.horizons.size(); ++i) {
            gs += csv_safe(ch.id) + "," + format_double(report.horizons[i]) + "," +
                  format_double(ch.gamma[i]) + "," + format_double(ch.gamma_ci[i]) + ",";
            if (report.gaps_run)
                gs += format_double(ch.gap[i]) + "," + format_double(ch.gap_ci[i]) + "," +
                      format_double(ch.slack(i));
            else
                gs += ",,";
            gs += "\n";
        }
    }
    write_text_file(d / "gamma_series.csv", gs);

    std::string ct =
        "challenger_id,tail_status,tail_mean,tail_slope,tail_ratio,clamp_count,min_slack\n";
    for (const auto& ch : report.challengers) {
        ct += csv_safe(ch.id) + "," + to_string(ch.trend.status) + "," +
              format_double(ch.trend.tail_mean) + "," + format_double(ch.trend.tail_slope) + "," +
              format_double(ch.trend.tail_ratio) + "," + std::to_string(ch.clamp_count) + ",";
        if (report.gaps_run && !ch.gap.empty()) {
            double min_slack = ch.slack(0);
            for (std::size_t i = 1; i < ch.gap.size(); ++i)
                min_slack = std::min(min_slack, ch.slack(i));
            ct += format_double(min_slack);
        }
        ct += "\n";
    }
    write_text_file(d / "certificate.csv", ct);

    std::string dg =
        "T,solver,p0_mean,mean_r2_p,mean_r2_h,max_abs_z,frac_z_above_3,degree_reductions\n";
    for (const auto& hd : report.horizon_diags)
        dg += format_double(hd.T) + "," + to_string(hd.solver) + "," + format_double(hd.p0_mean) +
              "," + format_double(hd.mean_r2_p) + "," + format_double(hd.mean_r2_h) + "," +
              format_double(hd.max_abs_z) + "," + format_double(hd.frac_z_above_3) + "," +
              std::to_string(hd.degree_reductions) + "\n";
    write_text_file(d / "diagnostics.csv", dg);

    std::string md;
    md += "artifact_version = " + std::string(kArtifactVersion) + "\n";
    md += "seed = " + std::to_string(report.seed) + "\n";
    md += "model = " + report.model_name + "\n";
    md += "candidate = " + report.candidate_id + "\n";
    md += "verdict = " + to_string(report.verdict) + "\n";
    md += "validation_pass = " + std::string(report.validation.pass ? "true" : "false") + "\n";
    md += "concavity_pass = " + std::string(report.concavity.pass ? "true" : "false") + "\n";
    md += "linear_verified = " + std::string(report.linear_verified ? "true" : "false") + "\n";
    md += "candidate_clamps = " + std::to_string(report.candidate_clamps) + "\n";
    md += "gaps_run = " + std::string(report.gaps_run ? "true" : "false") + "\n";
    md += "# effective configuration\n";
    md += render_config(cfg);
    write_text_file(d / "metadata.txt", md);

    write_text_file(d / "summary.txt", render_summary_from_dir(dir));
}

std::string render_summary_from_dir(const std::string& dir) {
    const fs::path d(dir);
    const auto meta = parse_metadata(read_text_file(d / "metadata.txt"));
    const auto certificate = parse_csv(read_text_file(d / "certificate.csv"));
    const auto series = parse_csv(read_text_file(d / "gamma_series.csv"));
    const auto diagnostics = parse_csv(read_text_file(d / "diagnostics.csv"));

    std::string out;
    out += "overtaking-optimality certificate\n";
    out += "=================================\n";
    out += "model: " + meta_value(meta, "model") + "\n";
    out += "candidate: " + meta_value(meta, "candidate") + "\n";
    out += "verdict: " + meta_value(meta, "verdict") + "\n";
    out += "validation: " + std::string(meta_value(meta, "validation_pass") == "true"
                                            ? "pass"
                                            : "FAIL") + "\n";
    out += "concavity: " + std::string(meta_value(meta, "concavity_pass") == "true"
                                           ? "pass"
                                           : "FAIL (certificate bound not applicable)") + "\n";
    out += "linear structure verified: " +
           std::string(meta_value(meta, "linear_verified") == "true" ? "yes" : "no") + "\n";
    out += "artifact version: " + meta_value(meta, "artifact_version") + "\n";
    out += "\n";
    out += "certificate tail by challenger\n";
    out += render_table(certificate);
    out += "\n";
    out += "series by horizon\n";
    out += render_table(series);
    out += "\n";
    out += "costate diagnostics by horizon\n";
    out += render_table(diagnostics);
    return out;
}

}  // namespace ovtk
