#include "metafal/controller.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <sys/wait.h>
#include <unistd.h>

#include "metafal/errors.hpp"
#include "metafal/wire.hpp"

namespace metafal {

ReferenceController::ReferenceController(const ScenarioConfig& cfg,
                                         ReferenceControllerParams params)
    : cfg_(cfg), params_(params) {}

Control ReferenceController::act(const Observation& obs) {
  // Each return shadows the neighbouring columns it would block for a body
  // `bubble` wide at its depth.
  const double spacing = 2.0 * cfg_.sensor_half_angle / static_cast<double>(kImageColumns - 1);
  const double bin_depth = cfg_.row_depth();
  std::array<std::uint8_t, kImageColumns> rows = obs.hit_row;
  for (std::size_t j = 0; j < kImageColumns; ++j) {
    const std::uint8_t b = obs.hit_row[j];
    if (b + 1u >= kImageRows || params_.bubble <= 0.0) {
      continue;
    }
    const double depth = (static_cast<double>(b) + 0.5) * bin_depth;
    const auto reach = static_cast<std::size_t>(std::atan2(params_.bubble, depth) / spacing);
    const std::size_t lo = j > reach ? j - reach : 0;
    const std::size_t hi = std::min(kImageColumns - 1, j + reach);
    for (std::size_t i = lo; i <= hi; ++i) {
      rows[i] = std::min(rows[i], b);
    }
  }
  const std::uint8_t deepest = *std::max_element(rows.begin(), rows.end());
  const double mid = 0.5 * static_cast<double>(kImageColumns - 1);

  double best_score = -1e300;
  double best_center = mid;
  std::size_t col = 0;
  while (col < kImageColumns) {
    auto open_col = [&](std::size_t c) { return rows[c] + params_.depth_slack >= deepest; };
    if (!open_col(col)) {
      ++col;
      continue;
    }
    std::size_t end = col;
    while (end + 1 < kImageColumns && open_col(end + 1)) {
      ++end;
    }
    const double center = 0.5 * static_cast<double>(col + end);
    const double score = static_cast<double>(end - col + 1) -
                         params_.center_weight * std::abs(center - mid);
    if (score > best_score) {
      best_score = score;
      best_center = center;
    }
    col = end + 1;
  }

  const double h = cfg_.sensor_half_angle;
  const double bearing = -h + 2.0 * h * (best_center / static_cast<double>(kImageColumns - 1));
  const double target_steer =
      std::clamp(std::atan2(2.0 * cfg_.wheelbase * std::sin(bearing), params_.lookahead),
                 -cfg_.max_steer, cfg_.max_steer);
  const double steer_rate = std::clamp(params_.steer_gain * (target_steer - obs.steer),
                                       -cfg_.max_steer_rate, cfg_.max_steer_rate);

  // Nearest return within +-10 degrees of the target bearing.
  const double cone = deg_to_rad(10.0);
  std::uint8_t nearest = static_cast<std::uint8_t>(kImageRows - 1);
  for (std::size_t c = 0; c < kImageColumns; ++c) {
    if (std::abs(column_bearing(c, cfg_) - bearing) <= cone) {
      nearest = std::min(nearest, rows[c]);
    }
  }
  const double open = static_cast<double>(nearest) / static_cast<double>(kImageRows - 1);
  const double accel = params_.accel_gain * (open - params_.brake_ratio) / cfg_.control_period;
  return Control{accel, steer_rate};
}

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::write(fd, data, n);
    if (w < 0 && errno == EINTR) {
      continue;
    }
    if (w <= 0) {
      throw ControllerProtocolError(std::string("write to controller failed: ") +
                                    std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

void read_all(int fd, std::uint8_t* data, std::size_t n) {
  const std::size_t want = n;
  while (n > 0) {
    const ssize_t r = ::read(fd, data, n);
    if (r < 0 && errno == EINTR) {
      continue;
    }
    if (r < 0) {
      throw ControllerProtocolError(std::string("read from controller failed: ") +
                                    std::strerror(errno));
    }
    if (r == 0) {
      throw ControllerProtocolError("controller closed its output after " +
                                    std::to_string(want - n) + " of " + std::to_string(want) +
                                    " response bytes");
    }
    data += r;
    n -= static_cast<std::size_t>(r);
  }
}

}  // namespace

ExternalController::ExternalController(std::vector<std::string> argv) {
  if (argv.empty()) {
    throw ConfigError("external controller command is empty");
  }
  std::signal(SIGPIPE, SIG_IGN);
  int down[2];
  int up[2];
  if (::pipe(down) != 0) {
    throw ControllerProtocolError("pipe() failed");
  }
  if (::pipe(up) != 0) {
    ::close(down[0]);
    ::close(down[1]);
    throw ControllerProtocolError("pipe() failed");
  }
  std::vector<char*> args;
  for (auto& a : argv) {
    args.push_back(a.data());
  }
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {down[0], down[1], up[0], up[1]}) {
      ::close(fd);
    }
    throw ControllerProtocolError("fork() failed");
  }
  if (pid_ == 0) {
    ::dup2(down[0], STDIN_FILENO);
    ::dup2(up[1], STDOUT_FILENO);
    for (int fd : {down[0], down[1], up[0], up[1]}) {
      ::close(fd);
    }
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(down[0]);
  ::close(up[1]);
  to_child_ = down[1];
  from_child_ = up[0];
}

ExternalController::~ExternalController() { shutdown(); }

void ExternalController::shutdown() {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
    }
    pid_ = -1;
  }
}

Control ExternalController::act(const Observation& obs) {
  if (to_child_ < 0) {
    throw ControllerProtocolError("external controller is not running");
  }
  const auto request = wire::encode_request(obs);
  write_all(to_child_, request.data(), request.size());
  std::array<std::uint8_t, wire::kResponseBytes> response{};
  read_all(from_child_, response.data(), response.size());
  return wire::decode_response(response);
}

}  // namespace metafal
