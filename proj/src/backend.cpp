#include "puppetai/backend.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <termios.h>
#include <unistd.h>

namespace puppetai {

SimBackend::SimBackend(std::span<const MotorChannelConfig> channels) : state_(SimState::from_configs(channels)) {}

std::vector<ChannelTelemetry> SimBackend::apply(std::span<const MotorCommand> commands, double dt_s) {
  auto result = step_sim(state_, commands, dt_s);
  state_ = std::move(result.state);
  return std::move(result.telemetry);
}

void SimBackend::reset_faults() { state_ = puppetai::reset_faults(std::move(state_)); }

void SimBackend::inject_fault(ChannelId channel) { state_ = puppetai::inject_fault(state_, channel); }

std::unique_ptr<ActuatorBackend> make_sim_backend(std::span<const MotorChannelConfig> channels) {
  return std::make_unique<SimBackend>(channels);
}

SerialBackend::SerialBackend(const std::filesystem::path& device, std::span<const MotorChannelConfig> channels) {
  fd_ = ::open(device.c_str(), O_RDWR | O_NOCTTY | O_NONBLOCK | O_CREAT, 0644);
  if (fd_ < 0) throw Error(Errc::FileNotFound, "cannot open serial device '" + device.string() + "': " + std::strerror(errno));
  if (::isatty(fd_)) {
    termios tio{};
    if (::tcgetattr(fd_, &tio) == 0) {
      ::cfmakeraw(&tio);
      ::cfsetispeed(&tio, B115200);
      ::cfsetospeed(&tio, B115200);
      ::tcsetattr(fd_, TCSANOW, &tio);
    }
  }
  for (const auto& c : channels) last_.push_back({c.channel_id, 0.0, 0.0, 0.0, false});
}

SerialBackend::~SerialBackend() {
  if (fd_ >= 0) ::close(fd_);
}

void SerialBackend::write_frame(const codec::WireFrame& frame) {
  const auto bytes = codec::encode_frame(frame);
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd_, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::TransportError, std::string("serial write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

void SerialBackend::poll_telemetry() {
  if (!::isatty(fd_)) return;
  std::uint8_t buf[256];
  while (true) {
    const ssize_t n = ::read(fd_, buf, sizeof buf);
    if (n <= 0) break;
    reader_.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
  }
  while (auto frame = reader_.next()) {
    const auto* tel = std::get_if<codec::TelemetryPayload>(&frame->payload);
    if (tel == nullptr) continue;
    for (auto& t : last_) {
      if (t.channel_id != frame->channel) continue;
      t.position_mm = codec::um_to_mm(tel->position_um);
      t.velocity_mm_s = codec::um_to_mm(tel->velocity_um_s);
      t.torque_estimate = tel->torque_milli / 1000.0;
      t.faulted = (tel->flags & 0x01) != 0;
    }
  }
}

std::vector<ChannelTelemetry> SerialBackend::apply(std::span<const MotorCommand> commands, double) {
  for (const auto& cmd : commands) {
    write_frame({cmd.channel_id, codec::Opcode::SetTarget, codec::SetTargetPayload{codec::mm_to_um(cmd.target_displacement_mm)}});
    for (auto& t : last_)
      if (t.channel_id == cmd.channel_id && !t.faulted) t.position_mm = cmd.target_displacement_mm;
  }
  poll_telemetry();
  return last_;
}

void SerialBackend::reset_faults() {
  for (auto& t : last_) t.faulted = false;
}

void SerialBackend::inject_fault(ChannelId channel) {
  for (auto& t : last_) {
    if (t.channel_id != channel) continue;
    write_frame({channel, codec::Opcode::Stop, std::monostate{}});
    t.faulted = true;
    t.velocity_mm_s = 0.0;
    return;
  }
  throw Error(Errc::UnknownChannel, "unknown channel " + std::to_string(channel));
}

}  // namespace puppetai
