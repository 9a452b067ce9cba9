#include "logsob/field_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace logsob {

namespace {

const char* kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= len; i += 3) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(kB64[(v >> 6) & 63]);
        out.push_back(kB64[v & 63]);
    }
    std::size_t rem = len - i;
    if (rem == 1) {
        std::uint32_t v = data[i] << 16;
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back('=');
        out.push_back('=');
    } else if (rem == 2) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(kB64[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        if (c == '=') return -1;
        throw std::invalid_argument("field file: bad base64 character");
    };
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t buf = 0;
    int bits = 0;
    for (char c : text) {
        int v = val(c);
        if (v < 0) break;  // padding
        buf = (buf << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((buf >> bits) & 0xFF));
        }
    }
    return out;
}

static_assert(sizeof(double) == 8);

}  // namespace

std::string field_to_json(const Field& u) {
    std::vector<unsigned char> raw(u.size() * 8);
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &u.values[i], 8);
        if constexpr (std::endian::native == std::endian::big) {
            std::uint64_t swapped = 0;
            for (int b = 0; b < 8; ++b) swapped |= ((bits >> (8 * b)) & 0xFF) << (8 * (7 - b));
            bits = swapped;
        }
        std::memcpy(raw.data() + 8 * i, &bits, 8);
    }
    nlohmann::json j;
    j["format"] = "logsob-field-v1";
    j["dim"] = u.grid.dim;
    j["radius"] = u.grid.radius;
    j["points_per_axis"] = u.grid.points_per_axis;
    j["stencil_order"] = u.grid.stencil_order;
    j["dtype"] = "f64le";
    j["order"] = "row-major";
    j["encoding"] = "base64";
    j["data"] = base64_encode(raw.data(), raw.size());
    return j.dump();
}

Field field_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("format") || j["format"] != "logsob-field-v1")
        throw std::invalid_argument("field file: unknown format");
    if (j.value("dtype", "") != "f64le" || j.value("encoding", "") != "base64" ||
        j.value("order", "") != "row-major")
        throw std::invalid_argument("field file: unsupported layout");
    Grid g = make_grid(j.at("dim").get<int>(), j.at("radius").get<double>(),
                       j.at("points_per_axis").get<int>(), j.at("stencil_order").get<int>());
    std::vector<unsigned char> raw = base64_decode(j.at("data").get<std::string>());
    if (raw.size() != g.size() * 8)
        throw std::invalid_argument("field file: payload size does not match grid");
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, raw.data() + 8 * i, 8);
        if constexpr (std::endian::native == std::endian::big) {
            std::uint64_t swapped = 0;
            for (int b = 0; b < 8; ++b) swapped |= ((bits >> (8 * b)) & 0xFF) << (8 * (7 - b));
            bits = swapped;
        }
        std::memcpy(&u.values[i], &bits, 8);
    }
    require_finite(u);
    return u;
}

void write_field(const Field& u, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << field_to_json(u) << "\n";
}

Field read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return field_from_json(text);
}

}  // namespace logsob
