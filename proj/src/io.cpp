#include "chirpsync/io.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chirpsync::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text) {
    const auto t = trim(text);
    if (t == "inf" || t == "+inf") return kNoiselessSnr;
    double value = 0.0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, value);
    if (ec != std::errc{} || ptr != end || t.empty()) {
        throw IoError("not a number: '" + std::string(t) + "'");
    }
    return value;
}

std::uint32_t to_little_endian(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
    }
    return v;
}

void put_float(std::string& out, float f) {
    const auto le = to_little_endian(std::bit_cast<std::uint32_t>(f));
    char bytes[4];
    std::memcpy(bytes, &le, 4);
    out.append(bytes, 4);
}

float get_float(const char* p) {
    std::uint32_t raw = 0;
    std::memcpy(&raw, p, 4);
    return std::bit_cast<float>(to_little_endian(raw));
}

}  // namespace

std::string encode_iq(std::span<const Complex> samples) {
    std::string out;
    out.reserve(samples.size() * 8);
    for (const auto& s : samples) {
        put_float(out, static_cast<float>(s.real()));
        put_float(out, static_cast<float>(s.imag()));
    }
    return out;
}

SampleBuffer decode_iq(std::string_view bytes) {
    if (bytes.size() % 8 != 0) {
        throw IoError("IQ data length " + std::to_string(bytes.size()) + " is not a multiple of 8 bytes");
    }
    SampleBuffer out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = {get_float(bytes.data() + 8 * i), get_float(bytes.data() + 8 * i + 4)};
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write to '" + path.string() + "' failed");
}

void write_iq(const std::filesystem::path& path, std::span<const Complex> samples) {
    write_text(path, encode_iq(samples));
}

SampleBuffer read_iq(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return decode_iq(buf.str());
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw IoError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw IoError("config line " + std::to_string(line_no) + ": empty key");
        if (!out.emplace(key, value).second) {
            throw IoError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_key_values(buf.str());
}

std::vector<double> parse_snr_grid(std::string_view text) {
    text = trim(text);
    if (text.empty()) throw IoError("empty SNR grid");
    std::vector<double> grid;

    if (text.find(':') != std::string_view::npos) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw IoError("SNR range must be start:step:stop");
        const double start = parse_double(text.substr(0, c1));
        const double step = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
        const double stop = parse_double(text.substr(c2 + 1));
        if (!(step > 0.0) || stop < start || !std::isfinite(stop - start)) {
            throw IoError("SNR range needs a positive step and start <= stop");
        }
        // Index-based stepping avoids accumulating rounding error.
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
        return grid;
    }

    while (true) {
        const auto comma = text.find(',');
        grid.push_back(parse_double(text.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        text = text.substr(comma + 1);
    }
    return grid;
}

std::string fig1_csv(const CorrelationDump& dump) {
    std::string out = "tau,corr_r1,corr_r2\n";
    for (const auto& row : dump.rows) {
        out += std::to_string(row.tau);
        out += ',';
        out += format_number(row.corr_r1);
        out += ',';
        out += format_number(row.corr_r2);
        out += '\n';
    }
    return out;
}

std::string fig2_header() {
    return "snr_db,estimator,mode,trials,failures,failure_prob,ci_lo,ci_hi,ffo_mse\n";
}

std::string fig2_rows(const SweepResult& result) {
    std::string out;
    for (const auto& c : result.cells) {
        out += format_number(c.snr_db) + ',' + std::string(to_string(c.estimator)) + ',' +
               std::string(to_string(c.mode)) + ',' + std::to_string(c.trials) + ',' +
               std::to_string(c.failures) + ',' + format_number(c.failure_prob) + ',' +
               format_number(c.ci_lo) + ',' + format_number(c.ci_hi) + ',' + format_number(c.ffo_mse) +
               '\n';
    }
    return out;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["n_fft"] = cfg.n_fft;
    j["r1"] = cfg.r1;
    j["r2"] = cfg.r2;
    j["cp_len"] = cfg.cp_len;
    j["paths"] = cfg.channel.path_count;
    j["decay"] = cfg.channel.decay;
    j["mode"] = to_string(cfg.channel.mode);
    j["normalize_power"] = cfg.channel.normalize_power;
    j["cfo"] = cfg.cfo_true;
    auto grid = nlohmann::ordered_json::array();
    for (const double s : cfg.snr_grid_db) grid.push_back(format_number(s));
    j["snr_grid_db"] = grid;
    j["trials"] = cfg.trials_per_point;
    auto est = nlohmann::ordered_json::array();
    for (const auto e : cfg.estimators) est.push_back(to_string(e));
    j["estimators"] = est;
    j["ffo_stage"] = cfg.ffo_stage_enabled;
    j["seed"] = cfg.master_seed;
    j["sca_search_range"] = cfg.effective_search_range();
    return j.dump();
}

std::string manifest_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["command"] = manifest.command;
    j["config"] = nlohmann::ordered_json::parse(manifest.config_json);
    j["tool_version"] = manifest.tool_version;
    j["started_at"] = manifest.started_at;
    j["output_paths"] = manifest.output_paths;
    return j.dump(2) + "\n";
}

std::string timestamp_utc() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace chirpsync::io
