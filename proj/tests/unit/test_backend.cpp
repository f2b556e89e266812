#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <fcntl.h>
#include <unistd.h>

#include "puppetai/backend.hpp"

using namespace puppetai;

namespace {

std::vector<MotorChannelConfig> two_channels() {
  std::vector<MotorChannelConfig> c(2);
  c[0].channel_id = 1;
  c[0].target = {"body", "sagittal"};
  c[1].channel_id = 2;
  c[1].target = {"body", "lateral"};
  return c;
}

}  // namespace

TEST_CASE("sim backend tracks step_sim") {
  const auto cfg = two_channels();
  SimBackend backend(cfg);
  SimState reference = SimState::from_configs(cfg);
  const std::vector<MotorCommand> cmds{{1, 5.0}, {2, -3.0}};
  for (int i = 0; i < 20; ++i) {
    auto r = step_sim(reference, cmds, 0.02);
    CHECK(backend.apply(cmds, 0.02) == r.telemetry);
    reference = r.state;
  }
  backend.inject_fault(2);
  CHECK(backend.apply(cmds, 0.02)[1].faulted);
  backend.reset_faults();
  CHECK_FALSE(backend.apply(cmds, 0.02)[1].faulted);
  CHECK_THROWS_AS(backend.inject_fault(7), Error);
}

TEST_CASE("serial backend writes set-target frames to a byte sink") {
  const auto path = std::filesystem::temp_directory_path() / ("puppetai_sink_" + std::to_string(::getpid()));
  std::filesystem::remove(path);
  {
    SerialBackend backend(path, two_channels());
    const std::vector<MotorCommand> cmds{{1, 10.0}, {2, -0.5}};
    const auto tel = backend.apply(cmds, 0.02);
    CHECK(tel[0].position_mm == 10.0);
    backend.inject_fault(2);
    CHECK_THROWS_AS(backend.inject_fault(9), Error);
  }
  std::ifstream in(path, std::ios::binary);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::filesystem::remove(path);

  codec::FrameReader reader;
  reader.feed(bytes);
  std::vector<codec::WireFrame> frames;
  while (auto f = reader.next()) frames.push_back(*f);
  REQUIRE(frames.size() == 3u);
  CHECK(frames[0] == codec::WireFrame{1, codec::Opcode::SetTarget, codec::SetTargetPayload{10000}});
  CHECK(frames[1] == codec::WireFrame{2, codec::Opcode::SetTarget, codec::SetTargetPayload{-500}});
  CHECK(frames[2] == codec::WireFrame{2, codec::Opcode::Stop, std::monostate{}});
}

TEST_CASE("serial backend reads telemetry from a tty") {
  const int master = ::posix_openpt(O_RDWR | O_NOCTTY);
  REQUIRE(master >= 0);
  REQUIRE(::grantpt(master) == 0);
  REQUIRE(::unlockpt(master) == 0);
  const std::string slave = ::ptsname(master);
  {
    SerialBackend backend(slave, two_channels());
    const auto frame = codec::encode_frame(2, codec::Opcode::Telemetry, codec::TelemetryPayload{1500, -200, 4000, 1});
    REQUIRE(::write(master, frame.data(), frame.size()) == static_cast<ssize_t>(frame.size()));
    ::usleep(20000);
    const std::vector<MotorCommand> cmds{{1, 2.0}};
    const auto tel = backend.apply(cmds, 0.02);
    CHECK(tel[1].position_mm == 1.5);
    CHECK(tel[1].velocity_mm_s == -0.2);
    CHECK(tel[1].torque_estimate == 4.0);
    CHECK(tel[1].faulted);

    std::uint8_t buf[64];
    ::usleep(20000);
    const ssize_t n = ::read(master, buf, sizeof buf);
    REQUIRE(n >= 9);
    CHECK(codec::decode_frame(std::span<const std::uint8_t>(buf, 9)) ==
          codec::WireFrame{1, codec::Opcode::SetTarget, codec::SetTargetPayload{2000}});
  }
  ::close(master);
}
