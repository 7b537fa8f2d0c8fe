#include "ovtk/ensemble.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "ovtk/fmt.hpp"
#include "ovtk/policy.hpp"

namespace ovtk {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

std::string ControlPolicy::format_value(double v) { return format_double(v); }

namespace {

constexpr char kMagic[5] = {'O', 'V', 'T', 'K', '1'};

double parse_double_token(std::string_view tok, const std::string& where) {
    double v = 0.0;
    const auto* b = tok.data();
    const auto* e = tok.data() + tok.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw InputError("malformed number '" + std::string(tok) + "' in " + where);
    return v;
}

}  // namespace

void write_ensemble_csv(const PathEnsemble& e, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << "# t_end=" << format_double(e.grid.t_end) << " n_steps=" << e.grid.n_steps
        << " n_paths=" << e.n_paths() << "\n";
    std::string line;
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
        line.clear();
        for (std::size_t k = 0; k < e.grid.n_nodes(); ++k) {
            if (k) line += ',';
            line += format_double(e.at(i, k));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw NumericalError("write failed for " + path);
}

PathEnsemble read_ensemble_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("# t_end=", 0) != 0)
        throw InputError(path + ": missing ensemble header");
    double t_end = 0.0;
    std::size_t n_steps = 0, n_paths = 0;
    {
        std::istringstream hs(header.substr(1));
        std::string tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "t_end")
                t_end = parse_double_token(val, path);
            else if (key == "n_steps")
                n_steps = std::stoull(val);
            else if (key == "n_paths")
                n_paths = std::stoull(val);
        }
    }
    if (n_steps == 0 || n_paths == 0) throw InputError(path + ": incomplete header");
    Eigen::ArrayXXd values(static_cast<Eigen::Index>(n_paths),
                           static_cast<Eigen::Index>(n_steps + 1));
    std::string line;
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (!std::getline(in, line)) throw InputError(path + ": truncated, expected more rows");
        std::size_t k = 0, pos = 0;
        while (pos <= line.size()) {
            auto comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            if (k > n_steps) throw InputError(path + ": too many columns in row");
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                parse_double_token(std::string_view(line).substr(pos, comma - pos), path);
            ++k;
            pos = comma + 1;
        }
        if (k != n_steps + 1) throw InputError(path + ": short row");
    }
    return PathEnsemble(TimeGrid(t_end, n_steps), std::move(values));
}

void write_ensemble_binary(const PathEnsemble& e, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t np = e.n_paths(), ns = e.grid.n_steps;
    const double te = e.grid.t_end;
    out.write(reinterpret_cast<const char*>(&np), sizeof(np));
    out.write(reinterpret_cast<const char*>(&ns), sizeof(ns));
    out.write(reinterpret_cast<const char*>(&te), sizeof(te));
    // Eigen arrays are column-major; emit row-major explicitly.
    std::vector<double> row(e.grid.n_nodes());
    for (std::size_t i = 0; i < e.n_paths(); ++i) {
        for (std::size_t k = 0; k < e.grid.n_nodes(); ++k) row[k] = e.at(i, k);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out) throw NumericalError("write failed for " + path);
}

PathEnsemble read_ensemble_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw InputError(path + ": bad magic, not an ensemble dump");
    std::uint64_t np = 0, ns = 0;
    double te = 0.0;
    in.read(reinterpret_cast<char*>(&np), sizeof(np));
    in.read(reinterpret_cast<char*>(&ns), sizeof(ns));
    in.read(reinterpret_cast<char*>(&te), sizeof(te));
    if (!in || np == 0 || ns == 0) throw InputError(path + ": corrupt header");
    Eigen::ArrayXXd values(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(ns + 1));
    std::vector<double> row(ns + 1);
    for (std::uint64_t i = 0; i < np; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
        if (!in) throw InputError(path + ": truncated payload");
        for (std::uint64_t k = 0; k <= ns; ++k)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
    return PathEnsemble(TimeGrid(te, ns), std::move(values));
}

}  // namespace ovtk
