#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "metafal/scenario.hpp"
#include "metafal/simulator.hpp"

namespace metafal::wire {

// Request frame: u32 big-endian payload length, then the packed bitmap and
// the steering angle as a big-endian IEEE-754 double.
inline constexpr std::size_t kPayloadBytes = kBitmapBytes + 8;
inline constexpr std::size_t kRequestBytes = 4 + kPayloadBytes;
// Response: accel and steer_rate, both big-endian doubles.
inline constexpr std::size_t kResponseBytes = 16;

void put_u32(std::uint32_t v, std::span<std::uint8_t, 4> out);
std::uint32_t get_u32(std::span<const std::uint8_t, 4> in);
void put_f64(double v, std::span<std::uint8_t, 8> out);
double get_f64(std::span<const std::uint8_t, 8> in);

std::array<std::uint8_t, kRequestBytes> encode_request(const Observation& obs);
/// Decodes a payload (the bytes after the length prefix).
Observation decode_payload(std::span<const std::uint8_t, kPayloadBytes> payload);

std::array<std::uint8_t, kResponseBytes> encode_response(const Control& u);
/// Throws ControllerProtocolError on non-finite values.
Control decode_response(std::span<const std::uint8_t, kResponseBytes> bytes);

}  // namespace metafal::wire
