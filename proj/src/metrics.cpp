#include "crossim/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace crossim {

std::string fmt_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_vehicles_csv(const std::string& path,
                        const std::vector<VehicleRecord>& rows) {
  auto out = open_out(path);
  out << "id,lane,kind,t_entry,t_exit,wait_time,energy\n";
  for (const VehicleRecord& r : rows) {
    out << r.id << ',' << r.lane << ',' << to_string(r.kind) << ','
        << fmt_num(r.t_entry) << ',' << fmt_num(r.t_exit) << ','
        << fmt_num(r.wait_time) << ',' << fmt_num(r.energy) << '\n';
  }
}

void write_blocks_csv(const std::string& path,
                      const std::vector<BlockRecord>& rows) {
  auto out = open_out(path);
  out << "k,t,X1,X2,X3,X4,action,reward,phase1,phase2,phase3,phase4\n";
  for (const BlockRecord& r : rows) {
    out << r.k << ',' << fmt_num(r.t);
    for (int q : r.queues) out << ',' << q;
    out << ',' << to_string(r.decided) << ',' << fmt_num(r.reward);
    for (char c : r.colors) out << ',' << c;
    out << '\n';
  }
}

}  // namespace crossim
