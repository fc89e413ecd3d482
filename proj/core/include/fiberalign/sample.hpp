#pragma once

namespace fiberalign {

// One power-meter reading on the simulated 5 Hz clock.
struct PowerSample {
  double time_s = 0.0;
  double power_w = 0.0;
};

}  // namespace fiberalign
