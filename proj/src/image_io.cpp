#include <mcac/io.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mcac::io {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int parse_int(const std::string& s, const std::string& what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad " + what + ": '" + s + "'");
    return v;
}

void write_u32le(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b{static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                   static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t read_u32le(std::istream& in) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw FormatError("truncated MCF1 header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path, std::size_t columns) {
    std::ifstream in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw FormatError("'" + path.string() + "': non-numeric row '" + line + "'");
        }
        first = false;
        if (row.size() != columns) {
            throw FormatError("'" + path.string() + "': expected " + std::to_string(columns) + " columns in '" +
                              line + "'");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    // Avoid "-0.000000".
    if (std::strspn(buf, "-0.") == std::strlen(buf) && buf[0] == '-') return std::string(buf + 1);
    return buf;
}

ScalarField2D read_pgm(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    if (pgm_token(in) != "P5") throw FormatError("'" + path.string() + "' is not a binary PGM (P5)");
    const int w = parse_int(pgm_token(in), "PGM width");
    const int h = parse_int(pgm_token(in), "PGM height");
    const int maxval = parse_int(pgm_token(in), "PGM maxval");
    if (w < 2 || h < 2 || maxval < 1 || maxval > 65535) throw FormatError("unsupported PGM header");
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw FormatError("'" + path.string() + "': truncated PGM data");
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = bytes == 1 ? raw[i] : static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
    return ScalarField2D(w, h, std::move(values));
}

void write_pgm(const std::filesystem::path& path, const ScalarField2D& f, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("write_pgm: bit depth must be 8 or 16");
    const int maxval = bit_depth == 8 ? 255 : 65535;
    std::ofstream out = open_out(path);
    out << "P5\n" << f.width() << ' ' << f.height() << '\n' << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(f.size() * (bit_depth / 8));
    for (double v : f.values()) {
        const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, static_cast<long>(maxval)));
        if (bit_depth == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
        raw.push_back(static_cast<unsigned char>(q & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

ScalarField2D read_raw_field(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "MCF1", 4) != 0) {
        throw FormatError("'" + path.string() + "' lacks MCF1 magic");
    }
    const std::uint32_t w = read_u32le(in);
    const std::uint32_t h = read_u32le(in);
    (void)read_u32le(in);
    if (w < 2 || h < 2 || w > (1u << 16) || h > (1u << 16)) throw FormatError("MCF1: bad dimensions");
    std::vector<double> values(static_cast<std::size_t>(w) * h);
    for (double& v : values) {
        std::uint64_t bits = 0;
        unsigned char b[8];
        if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("'" + path.string() + "': truncated MCF1 data");
        for (int k = 7; k >= 0; --k) bits = (bits << 8) | b[k];
        v = std::bit_cast<double>(bits);
    }
    return ScalarField2D(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

void write_raw_field(const std::filesystem::path& path, const ScalarField2D& f) {
    std::ofstream out = open_out(path);
    out.write("MCF1", 4);
    write_u32le(out, static_cast<std::uint32_t>(f.width()));
    write_u32le(out, static_cast<std::uint32_t>(f.height()));
    write_u32le(out, 0);
    for (double v : f.values()) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

PointSet read_points_csv(const std::filesystem::path& path) {
    PointSet pts;
    for (const auto& r : read_numeric_rows(path, 2)) pts.push_back({r[0], r[1]});
    return pts;
}

void write_points_csv(const std::filesystem::path& path, const PointSet& points) {
    std::ofstream out = open_out(path);
    out << "x,y\n";
    for (const auto& p : points) out << fmt(p.x, 9) << ',' << fmt(p.y, 9) << '\n';
}

std::vector<std::pair<int, int>> read_pairs_csv(const std::filesystem::path& path) {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& r : read_numeric_rows(path, 2)) {
        pairs.emplace_back(static_cast<int>(r[0]), static_cast<int>(r[1]));
    }
    return pairs;
}

void write_pairs_csv(const std::filesystem::path& path, const std::vector<std::pair<int, int>>& pairs) {
    std::ofstream out = open_out(path);
    out << "i,j\n";
    for (const auto& [i, j] : pairs) out << i << ',' << j << '\n';
}

}  // namespace mcac::io
