#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chirpsync/simlab.hpp"
#include "chirpsync/types.hpp"

namespace chirpsync::io {

/// Raised for unreadable/unwritable files and malformed text input.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// IQ files: raw little-endian binary32, interleaved I/Q, no header.
void write_iq(const std::filesystem::path& path, std::span<const Complex> samples);
SampleBuffer read_iq(const std::filesystem::path& path);
std::string encode_iq(std::span<const Complex> samples);
SampleBuffer decode_iq(std::string_view bytes);

/// 9 significant digits, '.' decimal separator regardless of locale.
std::string format_number(double value);

/// Parses `key = value` lines; '#' starts a comment; blank lines ignored.
/// Keys must be unique.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

/// Accepts a comma list ("0,5,10") or an inclusive range "start:step:stop".
/// "inf" selects the noiseless sentinel.
std::vector<double> parse_snr_grid(std::string_view text);

std::string fig1_csv(const CorrelationDump& dump);

std::string fig2_header();
std::string fig2_rows(const SweepResult& result);

struct RunManifest {
    std::string command;
    std::string config_json;  // serialized configuration object
    std::string tool_version;
    std::string started_at;   // ISO-8601 UTC
    std::vector<std::string> output_paths;
};

std::string config_to_json(const ExperimentConfig& cfg);
std::string manifest_json(const RunManifest& manifest);

/// Current UTC time, or SOURCE_DATE_EPOCH when that variable is set, for
/// reproducible manifests.
std::string timestamp_utc();

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace chirpsync::io
