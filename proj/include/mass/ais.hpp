#pragma once

// AIVDM/AIVDO decoding (ITU-R M.1371 6-bit payloads) for the replayed-traffic
// pipeline. Only types 1, 2, 3, 18 (position) and 5 (static) are decoded;
// everything else is passed through as Unsupported.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "mass/geo.hpp"
#include "mass/log.hpp"

namespace mass::ais {

struct StaticInfo {
    std::string name;
    std::optional<double> length_m;
    std::optional<double> beam_m;
};

struct AisMessage {
    int message_type = 0;
    std::uint32_t mmsi = 0;
    /// Seconds; absolute (tag block / receiver log) until normalize_timestamps.
    std::optional<double> timestamp;
    /// Unset when the payload carries the not-available sentinel or an out-of-range value.
    std::optional<LatLon> position;
    std::optional<double> sog_mps;
    std::optional<double> cog_deg;
    std::optional<int> heading_deg;
    std::optional<StaticInfo> static_info;

    bool is_position_report() const {
        return message_type == 1 || message_type == 2 || message_type == 3 || message_type == 18;
    }
};

/// One part of a multi-sentence message, held for assembly.
struct Fragment {
    int total = 0;
    int number = 0;
    std::string sequence_id;
    char channel = '\0';
    std::string payload;
    int fill_bits = 0;
    std::optional<double> timestamp;
};

struct Unsupported {
    int message_type = 0;
};

using Decoded = std::variant<AisMessage, Fragment, Unsupported>;
using Assembled = std::variant<AisMessage, Unsupported>;

/// Decodes one NMEA line, optionally prefixed with a `\c:<unix-seconds>*hh\` tag block.
/// Throws Error{ChecksumMismatch | MalformedSentence | PayloadTooShort}.
Decoded decode_sentence(std::string_view line);

/// Decodes an armored payload directly (no sentence envelope).
Assembled decode_payload(std::string_view payload, int fill_bits,
                         std::optional<double> timestamp = std::nullopt);

/// Throws Error{IncompleteGroup | InconsistentGroup}.
Assembled assemble_multipart(std::span<const Fragment> fragments);

/// NMEA checksum: XOR of the characters between the start delimiter and '*'.
std::uint8_t nmea_checksum(std::string_view body);

/// Streaming multipart assembler keyed on (sequence id, channel).
class MultipartAssembler {
public:
    explicit MultipartAssembler(LogSink* log = nullptr) : log_(log) {}

    /// Returns a decoded message once the group completes. Broken groups are
    /// dropped and logged.
    std::optional<Assembled> feed(const Fragment& fragment);

    /// Logs and discards any groups still waiting for fragments.
    void flush();

private:
    LogSink* log_;
    std::map<std::pair<std::string, char>, std::vector<Fragment>> groups_;
};

/// Text file of sentences, one per line. A line may carry a tag block or a
/// leading receiver-log timestamp column (`<seconds>,!AIVDM,...`). Bad lines
/// are logged and skipped.
std::vector<AisMessage> read_nmea(std::istream& in, LogSink* log = nullptr);

/// CSV with header `t,mmsi,lat,lon,sog_mps,cog_deg`. Rows become type-1 reports.
std::vector<AisMessage> read_csv(std::istream& in, LogSink* log = nullptr);

/// Shifts timestamps so they are seconds since `epoch`. Without an epoch the
/// earliest timestamp becomes zero. Messages without a timestamp are dropped.
std::vector<AisMessage> normalize_timestamps(std::vector<AisMessage> messages,
                                             std::optional<double> epoch, LogSink* log = nullptr);

}  // namespace mass::ais
