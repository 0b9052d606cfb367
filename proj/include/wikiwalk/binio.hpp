#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

// Little-endian fixed-width encoding used by the binary snapshots.
namespace wikiwalk::binio {

void put_u8(std::ostream& out, std::uint8_t v);
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
void put_bytes(std::ostream& out, const void* data, std::size_t n);

std::uint8_t get_u8(std::istream& in);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
double get_f64(std::istream& in);
std::string get_bytes(std::istream& in, std::size_t n);

std::uint32_t decode_u32(const unsigned char* p);
std::uint64_t decode_u64(const unsigned char* p);
double decode_f64(const unsigned char* p);

}  // namespace wikiwalk::binio
