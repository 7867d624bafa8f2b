#include "ccmtool/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "ccmtool/errors.hpp"

namespace ccmtool {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_recording_csv(const Recording& rec, std::ostream& out) {
    const std::size_t nc = rec.n_channels();
    for (std::size_t c = 0; c < nc; ++c) {
        if (c) out << ',';
        out << rec.channel(c).label();
    }
    out << '\n';
    const std::size_t ns = rec.n_samples();
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t c = 0; c < nc; ++c) {
            if (c) out << ',';
            out << format_double(rec.channel(c)[i]);
        }
        out << '\n';
    }
}

void write_recording_csv(const Recording& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_recording_csv(rec, out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string strip(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
        --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& field, std::size_t row) {
    const std::string s = strip(field);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw MalformedInput("row " + std::to_string(row) +
                             ": cannot parse '" + s + "' as a number");
    return v;
}

} // namespace

Recording read_recording_csv(std::istream& in, double sample_rate,
                             std::optional<double> event_onset) {
    std::string line;
    if (!std::getline(in, line))
        throw MalformedInput("empty input: expected a channel-label header");
    std::vector<std::string> labels;
    for (const auto& f : split_csv_line(line)) labels.push_back(strip(f));
    if (labels.empty() || labels.front().empty())
        throw MalformedInput("header row has no channel labels");

    const std::size_t nc = labels.size();
    std::vector<std::vector<double>> columns(nc);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != nc)
            throw MalformedInput("row " + std::to_string(row) + " has " +
                                 std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(nc));
        for (std::size_t c = 0; c < nc; ++c)
            columns[c].push_back(parse_double(fields[c], row));
        ++row;
    }
    if (columns.front().empty())
        throw MalformedInput("no sample rows after the header");

    std::vector<TimeSeries> channels;
    channels.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c)
        channels.emplace_back(std::move(columns[c]), sample_rate, labels[c]);
    return Recording(std::move(channels), event_onset);
}

Recording read_recording_csv(const std::string& path, double sample_rate,
                             std::optional<double> event_onset) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_recording_csv(in, sample_rate, event_onset);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec)
            throw IoError("cannot create directory '" +
                          p.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

} // namespace ccmtool
