#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crossim/actions.hpp"
#include "crossim/geometry.hpp"

namespace crossim {

// One completed journey: the vehicle entered at t_entry, cleared the merging
// zone (wait_time is measured against the free-flow merging-zone exit) and
// left the exit zone at t_exit.
struct VehicleRecord {
  int id = 0;
  int lane = 0;
  VehicleKind kind = VehicleKind::HDV;
  double t_entry = 0.0;
  double t_exit = 0.0;
  double wait_time = 0.0;
  double energy = 0.0;  // integral of u^2 over the journey
};

// One signal block: the queue state observed at its boundary, the action
// decided there, the action applied to the block (decided d_a blocks ago) and
// the resulting per-lane colors. `reward` is the weighted queue decrease over
// the block that ended at this boundary (zero for the first row).
struct BlockRecord {
  long k = 0;
  double t = 0.0;
  std::array<int, 4> queues{};
  ActionId decided = ActionId::OpenPair13;
  ActionId applied = ActionId::OpenPair13;
  std::array<char, 4> colors{};  // 'G' or 'R'
  double reward = 0.0;
};

// Shortest stable decimal rendering used by every CSV writer; runs with the
// same inputs must produce byte-identical files.
std::string fmt_num(double x);

void write_vehicles_csv(const std::string& path,
                        const std::vector<VehicleRecord>& rows);
void write_blocks_csv(const std::string& path,
                      const std::vector<BlockRecord>& rows);

}  // namespace crossim
