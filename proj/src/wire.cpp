#include "metafal/wire.hpp"

#include <bit>
#include <cmath>

#include "metafal/errors.hpp"

namespace metafal::wire {

void put_u32(std::uint32_t v, std::span<std::uint8_t, 4> out) {
  for (int i = 0; i < 4; ++i) {
    out[i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
  }
}

std::uint32_t get_u32(std::span<const std::uint8_t, 4> in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v = (v << 8) | in[i];
  }
  return v;
}

void put_f64(double v, std::span<std::uint8_t, 8> out) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
  }
}

double get_f64(std::span<const std::uint8_t, 8> in) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits = (bits << 8) | in[i];
  }
  return std::bit_cast<double>(bits);
}

std::array<std::uint8_t, kRequestBytes> encode_request(const Observation& obs) {
  std::array<std::uint8_t, kRequestBytes> out{};
  std::span<std::uint8_t, kRequestBytes> view(out);
  put_u32(static_cast<std::uint32_t>(kPayloadBytes), view.subspan<0, 4>());
  const auto bitmap = obs.pack_bitmap();
  std::copy(bitmap.begin(), bitmap.end(), out.begin() + 4);
  put_f64(obs.steer, view.subspan<4 + kBitmapBytes, 8>());
  return out;
}

Observation decode_payload(std::span<const std::uint8_t, kPayloadBytes> payload) {
  const double steer = get_f64(payload.subspan<kBitmapBytes, 8>());
  if (!std::isfinite(steer)) {
    throw ControllerProtocolError("request carries a non-finite steering angle");
  }
  return Observation::from_bitmap(payload.subspan<0, kBitmapBytes>(), steer);
}

std::array<std::uint8_t, kResponseBytes> encode_response(const Control& u) {
  std::array<std::uint8_t, kResponseBytes> out{};
  std::span<std::uint8_t, kResponseBytes> view(out);
  put_f64(u.accel, view.subspan<0, 8>());
  put_f64(u.steer_rate, view.subspan<8, 8>());
  return out;
}

Control decode_response(std::span<const std::uint8_t, kResponseBytes> bytes) {
  Control u{get_f64(bytes.subspan<0, 8>()), get_f64(bytes.subspan<8, 8>())};
  if (!std::isfinite(u.accel) || !std::isfinite(u.steer_rate)) {
    throw ControllerProtocolError("controller response holds a non-finite value");
  }
  return u;
}

}  // namespace metafal::wire
