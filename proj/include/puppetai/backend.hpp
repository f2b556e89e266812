#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "puppetai/actuation.hpp"
#include "puppetai/codec.hpp"

namespace puppetai {

// Executes motor commands. The control loop is the only caller.
class ActuatorBackend {
 public:
  virtual ~ActuatorBackend() = default;
  virtual std::vector<ChannelTelemetry> apply(std::span<const MotorCommand> commands, double dt_s) = 0;
  virtual void reset_faults() = 0;
  virtual void inject_fault(ChannelId channel) = 0;
};

class SimBackend final : public ActuatorBackend {
 public:
  explicit SimBackend(std::span<const MotorChannelConfig> channels);

  std::vector<ChannelTelemetry> apply(std::span<const MotorCommand> commands, double dt_s) override;
  void reset_faults() override;
  void inject_fault(ChannelId channel) override;

  const SimState& state() const noexcept { return state_; }

 private:
  SimState state_;
};

// Writes SET_TARGET frames to a serial device (or any byte sink path) and
// reads back TELEMETRY frames when the device produces them. Channels with
// no telemetry yet report their last commanded target.
class SerialBackend final : public ActuatorBackend {
 public:
  SerialBackend(const std::filesystem::path& device, std::span<const MotorChannelConfig> channels);
  ~SerialBackend() override;
  SerialBackend(const SerialBackend&) = delete;
  SerialBackend& operator=(const SerialBackend&) = delete;

  std::vector<ChannelTelemetry> apply(std::span<const MotorCommand> commands, double dt_s) override;
  void reset_faults() override;
  void inject_fault(ChannelId channel) override;

 private:
  void write_frame(const codec::WireFrame& frame);
  void poll_telemetry();

  int fd_ = -1;
  std::vector<ChannelTelemetry> last_;
  codec::FrameReader reader_;
};

std::unique_ptr<ActuatorBackend> make_sim_backend(std::span<const MotorChannelConfig> channels);

}  // namespace puppetai
