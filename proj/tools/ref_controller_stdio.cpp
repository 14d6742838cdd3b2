// Serves the reference controller over stdin/stdout using the binary frame
// protocol. An optional experiment config supplies the scenario and gains.
// Exits 0 on a clean EOF between frames, 1 on a malformed frame.

#include <array>
#include <cerrno>
#include <iostream>
#include <unistd.h>

#include "metafal/controller.hpp"
#include "metafal/errors.hpp"
#include "metafal/harness.hpp"
#include "metafal/wire.hpp"

namespace {

// Returns the number of bytes read before EOF.
std::size_t read_full(int fd, std::uint8_t* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::read(fd, data + got, n - got);
    if (r < 0 && errno == EINTR) {
      continue;
    }
    if (r <= 0) {
      break;
    }
    got += static_cast<std::size_t>(r);
  }
  return got;
}

bool write_full(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w < 0 && errno == EINTR) {
      continue;
    }
    if (w <= 0) {
      return false;
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace metafal;
  ScenarioConfig cfg;
  ReferenceControllerParams params;
  try {
    if (argc > 1) {
      const ExperimentConfig exp = load_experiment(argv[1]);
      cfg = exp.scenario;
      params = exp.controller;
    }
  } catch (const Error& e) {
    std::cerr << "metafal_ref_controller: " << e.what() << '\n';
    return 64;
  }
  ReferenceController controller(cfg, params);

  std::array<std::uint8_t, 4> len{};
  std::array<std::uint8_t, wire::kPayloadBytes> payload{};
  while (true) {
    const std::size_t got = read_full(STDIN_FILENO, len.data(), len.size());
    if (got == 0) {
      return 0;
    }
    if (got < len.size() || wire::get_u32(len) != wire::kPayloadBytes) {
      std::cerr << "metafal_ref_controller: bad frame header\n";
      return 1;
    }
    if (read_full(STDIN_FILENO, payload.data(), payload.size()) != payload.size()) {
      std::cerr << "metafal_ref_controller: truncated frame\n";
      return 1;
    }
    try {
      const Control u = controller.act(wire::decode_payload(payload));
      const auto out = wire::encode_response(u);
      if (!write_full(STDOUT_FILENO, out.data(), out.size())) {
        return 1;
      }
    } catch (const Error& e) {
      std::cerr << "metafal_ref_controller: " << e.what() << '\n';
      return 1;
    }
  }
}
