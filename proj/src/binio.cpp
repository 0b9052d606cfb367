#include "wikiwalk/binio.hpp"

#include <bit>
#include <cstring>

#include "wikiwalk/common.hpp"

namespace wikiwalk {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

namespace binio {

namespace {

template <typename UInt>
void put_le(std::ostream& out, UInt v) {
    unsigned char buf[sizeof(UInt)];
    for (std::size_t i = 0; i < sizeof(UInt); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(UInt));
}

template <typename UInt>
UInt decode_le(const unsigned char* p) {
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(p[i]) << (8 * i);
    return v;
}

template <typename UInt>
UInt get_le(std::istream& in) {
    unsigned char buf[sizeof(UInt)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(UInt))) throw DataError("truncated binary snapshot");
    return decode_le<UInt>(buf);
}

}  // namespace

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }
void put_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
void put_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
void put_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

std::uint8_t get_u8(std::istream& in) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw DataError("truncated binary snapshot");
    return static_cast<std::uint8_t>(c);
}
std::uint32_t get_u32(std::istream& in) { return get_le<std::uint32_t>(in); }
std::uint64_t get_u64(std::istream& in) { return get_le<std::uint64_t>(in); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

std::string get_bytes(std::istream& in, std::size_t n) {
    std::string s(n, '\0');
    if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) throw DataError("truncated binary snapshot");
    return s;
}

std::uint32_t decode_u32(const unsigned char* p) { return decode_le<std::uint32_t>(p); }
std::uint64_t decode_u64(const unsigned char* p) { return decode_le<std::uint64_t>(p); }
double decode_f64(const unsigned char* p) { return std::bit_cast<double>(decode_le<std::uint64_t>(p)); }

}  // namespace binio
}  // namespace wikiwalk
