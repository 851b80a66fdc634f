#include "mass/ais.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <limits>
#include <sstream>

#include "mass/error.hpp"

namespace mass::ais {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            return out;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return v;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::uint8_t> parse_hex_byte(std::string_view s) {
    if (s.size() != 2) return std::nullopt;
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + 2, v, 16);
    if (ec != std::errc{} || p != s.data() + 2) return std::nullopt;
    return static_cast<std::uint8_t>(v);
}

/// Unpacked payload bits, MSB first per 6-bit character.
class PayloadBits {
public:
    PayloadBits(std::string_view armored, int fill_bits) {
        if (fill_bits < 0 || fill_bits > 5) throw Error(Errc::MalformedSentence, "fill bits out of range");
        bits_.reserve(armored.size() * 6);
        for (char c : armored) {
            int v = static_cast<unsigned char>(c) - 48;
            if (v < 0 || v > 71 || (v > 39 && v < 48)) {
                throw Error(Errc::MalformedSentence, std::string("invalid payload character '") + c + "'");
            }
            if (v > 40) v -= 8;
            for (int b = 5; b >= 0; --b) bits_.push_back(static_cast<std::uint8_t>((v >> b) & 1));
        }
        const auto drop = std::min<std::size_t>(static_cast<std::size_t>(fill_bits), bits_.size());
        bits_.resize(bits_.size() - drop);
    }

    std::size_t size() const { return bits_.size(); }

    std::uint32_t u(std::size_t start, std::size_t len) const {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < len; ++i) v = (v << 1) | bits_[start + i];
        return v;
    }

    std::int32_t s(std::size_t start, std::size_t len) const {
        const std::uint32_t raw = u(start, len);
        if (raw & (1u << (len - 1))) return static_cast<std::int32_t>(raw) - static_cast<std::int32_t>(1u << len);
        return static_cast<std::int32_t>(raw);
    }

    std::string text(std::size_t start, std::size_t chars) const {
        std::string out;
        for (std::size_t i = 0; i < chars; ++i) {
            const auto v = u(start + 6 * i, 6);
            out.push_back(static_cast<char>(v < 32 ? v + 64 : v));
        }
        while (!out.empty() && (out.back() == '@' || out.back() == ' ')) out.pop_back();
        return out;
    }

private:
    std::vector<std::uint8_t> bits_;
};

void require_bits(const PayloadBits& bits, std::size_t need, int type) {
    if (bits.size() < need) {
        throw Error(Errc::PayloadTooShort, "type " + std::to_string(type) + " needs " + std::to_string(need) +
                                               " bits, got " + std::to_string(bits.size()));
    }
}

void decode_position(const PayloadBits& bits, AisMessage& m, std::size_t sog_at, std::size_t lon_at,
                     std::size_t lat_at, std::size_t cog_at, std::size_t hdg_at) {
    const auto sog = bits.u(sog_at, 10);
    if (sog != 1023) m.sog_mps = sog / 10.0 * kKnotToMps;

    const auto lon_raw = bits.s(lon_at, 28);
    const auto lat_raw = bits.s(lat_at, 27);
    const double lon = lon_raw / 600000.0;
    const double lat = lat_raw / 600000.0;
    if (lon_raw != 108600000 && lat_raw != 54600000 && std::abs(lon) <= 180.0 && std::abs(lat) <= 90.0) {
        m.position = LatLon{lat, lon};
    }

    const auto cog = bits.u(cog_at, 12);
    if (cog < 3600) m.cog_deg = cog / 10.0;

    const auto hdg = bits.u(hdg_at, 9);
    if (hdg < 360) m.heading_deg = static_cast<int>(hdg);
}

struct TagBlock {
    std::optional<double> timestamp;
};

TagBlock parse_tag_block(std::string_view content) {
    TagBlock tb;
    std::string_view fields = content;
    if (const auto star = content.rfind('*'); star != std::string_view::npos) {
        const auto expected = parse_hex_byte(content.substr(star + 1));
        if (!expected) throw Error(Errc::MalformedSentence, "bad tag block checksum field");
        fields = content.substr(0, star);
        if (nmea_checksum(fields) != *expected) throw Error(Errc::ChecksumMismatch, "tag block");
    }
    for (auto f : split(fields, ',')) {
        if (f.size() > 2 && f[0] == 'c' && f[1] == ':') {
            auto v = parse_double(f.substr(2));
            if (!v) throw Error(Errc::MalformedSentence, "bad tag block time");
            // Some receivers log milliseconds.
            tb.timestamp = *v > 1e11 ? *v / 1000.0 : *v;
        }
    }
    return tb;
}

}  // namespace

std::uint8_t nmea_checksum(std::string_view body) {
    std::uint8_t cs = 0;
    for (char c : body) cs ^= static_cast<std::uint8_t>(c);
    return cs;
}

Assembled decode_payload(std::string_view payload, int fill_bits, std::optional<double> timestamp) {
    const PayloadBits bits(payload, fill_bits);
    if (bits.size() < 38) throw Error(Errc::PayloadTooShort, "payload shorter than type + mmsi");

    AisMessage m;
    m.message_type = static_cast<int>(bits.u(0, 6));
    m.mmsi = bits.u(8, 30);
    m.timestamp = timestamp;

    switch (m.message_type) {
    case 1:
    case 2:
    case 3:
        require_bits(bits, 137, m.message_type);
        decode_position(bits, m, 50, 61, 89, 116, 128);
        return m;
    case 18:
        require_bits(bits, 133, m.message_type);
        decode_position(bits, m, 46, 57, 85, 112, 124);
        return m;
    case 5: {
        require_bits(bits, 270, m.message_type);
        StaticInfo info;
        info.name = bits.text(112, 20);
        const auto length = bits.u(240, 9) + bits.u(249, 9);
        const auto beam = bits.u(258, 6) + bits.u(264, 6);
        if (length > 0) info.length_m = length;
        if (beam > 0) info.beam_m = beam;
        m.static_info = std::move(info);
        return m;
    }
    default:
        return Unsupported{m.message_type};
    }
}

Decoded decode_sentence(std::string_view line) {
    line = trim(line);
    TagBlock tag;
    if (!line.empty() && line.front() == '\\') {
        const auto close = line.find('\\', 1);
        if (close == std::string_view::npos) throw Error(Errc::MalformedSentence, "unterminated tag block");
        tag = parse_tag_block(line.substr(1, close - 1));
        line = line.substr(close + 1);
    }
    if (line.empty() || (line.front() != '!' && line.front() != '$')) {
        throw Error(Errc::MalformedSentence, "missing start delimiter");
    }
    const auto star = line.rfind('*');
    if (star == std::string_view::npos) throw Error(Errc::MalformedSentence, "missing checksum");
    const auto expected = parse_hex_byte(line.substr(star + 1));
    if (!expected) throw Error(Errc::MalformedSentence, "bad checksum field");
    const auto body = line.substr(1, star - 1);
    if (nmea_checksum(body) != *expected) throw Error(Errc::ChecksumMismatch, std::string(line));

    const auto f = split(body, ',');
    if (f.size() != 7) throw Error(Errc::MalformedSentence, "expected 7 fields, got " + std::to_string(f.size()));
    const auto formatter = f[0];
    if (formatter.size() != 5 || (formatter.substr(2) != "VDM" && formatter.substr(2) != "VDO")) {
        throw Error(Errc::MalformedSentence, "not a VDM/VDO sentence");
    }
    const auto total = parse_int(f[1]);
    const auto number = parse_int(f[2]);
    const auto fill = parse_int(f[6]);
    if (!total || !number || !fill || *total < 1 || *total > 9 || *number < 1 || *number > *total) {
        throw Error(Errc::MalformedSentence, "bad fragment count/number/fill");
    }
    if (f[4].size() > 1) throw Error(Errc::MalformedSentence, "bad channel");
    if (f[5].empty()) throw Error(Errc::PayloadTooShort, "empty payload");

    if (*total > 1) {
        // Validate the armor now so corrupt fragments fail at the line that carries them.
        PayloadBits check(f[5], *fill);
        (void)check;
        return Fragment{*total,         *number, std::string(f[3]), f[4].empty() ? '\0' : f[4].front(),
                        std::string(f[5]), *fill, tag.timestamp};
    }
    return std::visit([](auto&& v) -> Decoded { return v; }, decode_payload(f[5], *fill, tag.timestamp));
}

Assembled assemble_multipart(std::span<const Fragment> fragments) {
    if (fragments.empty()) throw Error(Errc::IncompleteGroup, "no fragments");
    const auto& first = fragments.front();
    for (const auto& fr : fragments) {
        if (fr.total != first.total) {
            throw Error(Errc::InconsistentGroup, "fragments declare totals " + std::to_string(first.total) +
                                                     " and " + std::to_string(fr.total));
        }
        if (fr.sequence_id != first.sequence_id || fr.channel != first.channel) {
            throw Error(Errc::InconsistentGroup, "fragments from different groups");
        }
    }
    if (static_cast<int>(fragments.size()) > first.total) {
        throw Error(Errc::InconsistentGroup, "more fragments than declared");
    }
    std::vector<const Fragment*> ordered(static_cast<std::size_t>(first.total), nullptr);
    for (const auto& fr : fragments) {
        auto& slot = ordered[static_cast<std::size_t>(fr.number - 1)];
        if (slot) throw Error(Errc::InconsistentGroup, "duplicate fragment " + std::to_string(fr.number));
        slot = &fr;
    }
    std::string payload;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        if (!ordered[i]) throw Error(Errc::IncompleteGroup, "missing fragment " + std::to_string(i + 1));
        payload += ordered[i]->payload;
    }
    std::optional<double> ts;
    for (const auto* fr : ordered) {
        if (fr->timestamp) {
            ts = fr->timestamp;
            break;
        }
    }
    return decode_payload(payload, ordered.back()->fill_bits, ts);
}

std::optional<Assembled> MultipartAssembler::feed(const Fragment& fragment) {
    auto& group = groups_[{fragment.sequence_id, fragment.channel}];
    if (!group.empty()) {
        const bool restart = fragment.number == 1 ||
                             std::any_of(group.begin(), group.end(),
                                         [&](const Fragment& g) { return g.number == fragment.number; });
        if (group.front().total != fragment.total) {
            log_line(log_, "InconsistentGroup: seq '" + fragment.sequence_id + "' totals " +
                               std::to_string(group.front().total) + " vs " + std::to_string(fragment.total));
            group.clear();
        } else if (restart) {
            log_line(log_, "IncompleteGroup: seq '" + fragment.sequence_id + "' superseded before completion");
            group.clear();
        }
    }
    group.push_back(fragment);
    if (static_cast<int>(group.size()) < fragment.total) return std::nullopt;

    std::vector<Fragment> done = std::move(group);
    groups_.erase({fragment.sequence_id, fragment.channel});
    try {
        return assemble_multipart(done);
    } catch (const Error& e) {
        log_line(log_, e.what());
        return std::nullopt;
    }
}

void MultipartAssembler::flush() {
    for (const auto& [key, group] : groups_) {
        if (!group.empty()) {
            log_line(log_, "IncompleteGroup: seq '" + key.first + "' has " + std::to_string(group.size()) + " of " +
                               std::to_string(group.front().total) + " fragments at end of input");
        }
    }
    groups_.clear();
}

std::vector<AisMessage> read_nmea(std::istream& in, LogSink* log) {
    std::vector<AisMessage> out;
    MultipartAssembler assembler(log);
    std::size_t unsupported = 0;
    std::string raw;
    std::size_t lineno = 0;

    auto accept = [&](const Assembled& a, std::optional<double> column_ts) {
        if (const auto* m = std::get_if<AisMessage>(&a)) {
            out.push_back(*m);
            if (!out.back().timestamp) out.back().timestamp = column_ts;
        } else {
            ++unsupported;
        }
    };

    while (std::getline(in, raw)) {
        ++lineno;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        std::optional<double> column_ts;
        if (line.front() != '\\' && line.front() != '!' && line.front() != '$') {
            const auto sep = line.find_first_of(", \t");
            if (sep == std::string_view::npos) {
                log_line(log, "line " + std::to_string(lineno) + ": MalformedSentence: no sentence");
                continue;
            }
            column_ts = parse_double(line.substr(0, sep));
            if (!column_ts) {
                log_line(log, "line " + std::to_string(lineno) + ": MalformedSentence: bad timestamp column");
                continue;
            }
            line = trim(line.substr(sep + 1));
        }

        try {
            auto d = decode_sentence(line);
            if (auto* fr = std::get_if<Fragment>(&d)) {
                if (!fr->timestamp) fr->timestamp = column_ts;
                if (auto a = assembler.feed(*fr)) accept(*a, column_ts);
            } else if (auto* m = std::get_if<AisMessage>(&d)) {
                accept(*m, column_ts);
            } else {
                ++unsupported;
            }
        } catch (const Error& e) {
            log_line(log, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    assembler.flush();
    if (unsupported > 0) log_line(log, "skipped " + std::to_string(unsupported) + " unsupported message(s)");
    return out;
}

std::vector<AisMessage> read_csv(std::istream& in, LogSink* log) {
    std::vector<AisMessage> out;
    std::string raw;
    if (!std::getline(in, raw)) return out;
    {
        std::string header;
        for (char c : raw) {
            if (!std::isspace(static_cast<unsigned char>(c))) header.push_back(c);
        }
        if (header != "t,mmsi,lat,lon,sog_mps,cog_deg") {
            log_line(log, "csv: unexpected header '" + raw + "'");
            return out;
        }
    }
    std::size_t lineno = 1;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto f = split(line, ',');
        std::array<double, 6> v{};
        bool ok = f.size() == v.size();
        for (std::size_t i = 0; ok && i < v.size(); ++i) {
            const auto parsed = i < 4 || !trim(f[i]).empty() ? parse_double(f[i]) : std::optional<double>(-1.0);
            ok = parsed.has_value();
            if (ok) v[i] = *parsed;
        }
        const auto [t, mmsi, lat, lon, sog, cog] = v;
        if (!ok || mmsi < 0 || mmsi > 999999999 || std::abs(lat) > 90.0 || std::abs(lon) > 180.0) {
            log_line(log, "csv line " + std::to_string(lineno) + ": malformed row");
            continue;
        }
        AisMessage m;
        m.message_type = 1;
        m.mmsi = static_cast<std::uint32_t>(mmsi);
        m.timestamp = t;
        m.position = LatLon{lat, lon};
        if (sog >= 0.0) m.sog_mps = sog;
        if (cog >= 0.0) m.cog_deg = wrap360(cog);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<AisMessage> normalize_timestamps(std::vector<AisMessage> messages, std::optional<double> epoch,
                                             LogSink* log) {
    const auto dropped = std::erase_if(messages, [](const AisMessage& m) { return !m.timestamp.has_value(); });
    if (dropped > 0) log_line(log, "dropped " + std::to_string(dropped) + " message(s) without timestamp");
    if (messages.empty()) return messages;
    double base = epoch.value_or(std::numeric_limits<double>::infinity());
    if (!epoch) {
        for (const auto& m : messages) base = std::min(base, *m.timestamp);
    }
    for (auto& m : messages) *m.timestamp -= base;
    return messages;
}

}  // namespace mass::ais
