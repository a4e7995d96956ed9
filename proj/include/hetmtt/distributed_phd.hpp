#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetmtt/netsim.hpp"
#include "hetmtt/phd.hpp"
#include "hetmtt/sensors.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

/// Something the distributed filter could not do because a peer was out of range.
struct ExchangeEvent {
  std::string what;
  RobotId from = 0;
  RobotId to = 0;
};

/// Per-robot PHD stores. Robot i keeps the authoritative value of every cell it
/// owns; all other entries of its store are scratch space filled by messages.
/// Every value that crosses an ownership boundary travels through the Network.
class DistributedPhd {
 public:
  DistributedPhd(const GridWorld& world, std::size_t robots, const PhdGrid& initial, std::vector<RobotId> owner)
      : world_(world), owner_(std::move(owner)), stores_(robots, initial.values) {
    check_owner(owner_);
  }

  std::size_t robots() const { return stores_.size(); }
  const std::vector<RobotId>& owner() const { return owner_; }
  std::span<const double> store(RobotId r) const { return stores_[r]; }
  const std::vector<ExchangeEvent>& events() const { return events_; }
  std::vector<ExchangeEvent> take_events() { return std::exchange(events_, {}); }

  /// Union of the owned slices.
  PhdGrid assemble() const {
    PhdGrid out(owner_.size());
    for (CellIndex x = 0; x < owner_.size(); ++x) out[x] = stores_[owner_[x]][x];
    return out;
  }

  /// Hands every cell whose owner changes to its new owner.
  void repartition(std::vector<RobotId> next, Network& net) {
    check_owner(next);
    std::map<std::pair<RobotId, RobotId>, Message> batches;
    for (CellIndex x = 0; x < owner_.size(); ++x) {
      const RobotId from = owner_[x];
      const RobotId to = next[x];
      if (from == to) continue;
      Message& m = batches[{from, to}];
      m.from = from;
      m.to = to;
      m.kind = MessageKind::phd_slice;
      m.cells.push_back(x);
      m.values.push_back(stores_[from][x]);
    }
    for (auto& [key, m] : batches) {
      m.bytes = payload::phd_slice(m.cells.size());
      net.send(std::move(m));
    }
    absorb(net.deliver());
    note_dropped(net, "ownership transfer");
    owner_ = std::move(next);
  }

  /// Values at `cells` as seen by `requester`: owned cells from its own store, the
  /// rest pushed by their owners. Unreachable cells read as 0.
  std::vector<double> gather(RobotId requester, std::span<const CellIndex> cells, Network& net) {
    std::map<RobotId, Message> pushes;
    for (CellIndex x : cells) {
      const RobotId k = owner_[x];
      if (k == requester) continue;
      Message& m = pushes[k];
      m.from = k;
      m.to = requester;
      m.kind = MessageKind::phd_slice;
      m.cells.push_back(x);
      m.values.push_back(stores_[k][x]);
    }
    if (pushes.empty()) {
      std::vector<double> out(cells.size());
      for (std::size_t i = 0; i < cells.size(); ++i) out[i] = stores_[requester][cells[i]];
      return out;
    }
    for (auto& [k, m] : pushes) {
      m.bytes = payload::phd_slice(m.cells.size());
      net.send(std::move(m));
    }
    const auto inboxes = net.deliver();
    note_dropped(net, "slice request");

    std::vector<char> fresh(owner_.size(), 0);
    auto& mine = stores_[requester];
    for (const Message& m : inboxes[requester]) {
      for (std::size_t k = 0; k < m.cells.size(); ++k) {
        mine[m.cells[k]] = m.values[k];
        fresh[m.cells[k]] = 1;
      }
    }
    std::vector<double> out(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const CellIndex x = cells[i];
      out[i] = (owner_[x] == requester || fresh[x]) ? mine[x] : 0.0;
    }
    return out;
  }

  /// Prediction: every robot pulls the kernel halo around its region from the
  /// owners, then predicts its own cells.
  void predict(const PhdModels& models, Network& net) {
    const MotionKernel kernel(models.motion_sd, world_.cell_size());
    const std::size_t n = robots();
    std::vector<std::vector<CellIndex>> owned(n);
    for (CellIndex x = 0; x < owner_.size(); ++x) owned[owner_[x]].push_back(x);

    std::vector<std::size_t> stamp(owner_.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const RobotId me = static_cast<RobotId>(i);
      std::map<RobotId, Message> pushes;
      for (CellIndex x : owned[i]) {
        const int col = world_.col_of(x);
        const int row = world_.row_of(x);
        for (const auto& t : kernel.taps()) {
          const int c = col - t.dx;
          const int r = row - t.dy;
          if (!world_.valid_col_row(c, r)) continue;
          const CellIndex src = world_.index_of(c, r);
          if (owner_[src] == me || stamp[src] == i + 1) continue;
          stamp[src] = i + 1;
          Message& m = pushes[owner_[src]];
          m.from = owner_[src];
          m.to = me;
          m.kind = MessageKind::phd_slice;
          m.cells.push_back(src);
        }
      }
      for (auto& [k, m] : pushes) {
        std::sort(m.cells.begin(), m.cells.end());
        m.values.reserve(m.cells.size());
        for (CellIndex src : m.cells) m.values.push_back(stores_[k][src]);
        m.bytes = payload::phd_slice(m.cells.size());
        net.send(std::move(m));
      }
    }
    absorb(net.deliver());
    note_dropped(net, "prediction halo");

    std::vector<std::vector<double>> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i].resize(owned[i].size());
      for (std::size_t k = 0; k < owned[i].size(); ++k) {
        next[i][k] = predict_cell(world_, kernel, models, stores_[i], owned[i][k]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < owned[i].size(); ++k) stores_[i][owned[i][k]] = next[i][k];
    }
  }

  /// Measurement update for one sensor: owners of the footprint push v_bar to the
  /// sensing robot, which corrects the footprint and pushes the result back.
  void correct(const SensorSpec& spec, const RobotState& pose, const FovCells& fov,
               std::span<const Measurement> measurements, const PhdModels& models, Network& net) {
    if (fov.empty()) return;
    const RobotId me = pose.id;
    const std::vector<double> predicted = gather(me, fov.cells, net);
    const std::vector<double> posterior =
        update_footprint(fov, predicted, models, spec, pose, measurements, world_);

    std::map<RobotId, Message> replies;
    for (std::size_t k = 0; k < fov.size(); ++k) {
      const CellIndex x = fov.cells[k];
      const RobotId o = owner_[x];
      if (o == me) {
        stores_[me][x] = posterior[k];
        continue;
      }
      Message& m = replies[o];
      m.from = me;
      m.to = o;
      m.kind = MessageKind::phd_slice;
      m.cells.push_back(x);
      m.values.push_back(posterior[k]);
    }
    if (replies.empty()) return;
    for (auto& [o, m] : replies) {
      m.bytes = payload::phd_slice(m.cells.size());
      net.send(std::move(m));
    }
    absorb(net.deliver());
    note_dropped(net, "posterior return");
  }

 private:
  void check_owner(const std::vector<RobotId>& owner) const {
    if (owner.size() != world_.cell_count()) throw std::invalid_argument("DistributedPhd: owner map size mismatch");
    for (RobotId r : owner) {
      if (r < 0 || static_cast<std::size_t>(r) >= stores_.size()) {
        throw std::invalid_argument("DistributedPhd: owner id out of range");
      }
    }
  }

  void absorb(const std::vector<std::vector<Message>>& inboxes) {
    for (std::size_t r = 0; r < inboxes.size(); ++r) {
      for (const Message& m : inboxes[r]) {
        for (std::size_t k = 0; k < m.cells.size(); ++k) stores_[r][m.cells[k]] = m.values[k];
      }
    }
  }

  void note_dropped(Network& net, const char* what) {
    for (const DroppedMessage& d : net.take_dropped()) events_.push_back({what, d.from, d.to});
  }

  GridWorld world_;
  std::vector<RobotId> owner_;
  std::vector<std::vector<double>> stores_;
  std::vector<ExchangeEvent> events_;
};

/// One full measurement round: sensors correct in id order, each seeing the
/// posterior left by the previous one.
inline void exchange_slices(DistributedPhd& phd, std::span<const SensorSpec> specs, std::span<const RobotState> poses,
                            std::span<const FovCells> fovs, std::span<const MeasurementSet> measurements,
                            const PhdModels& models, Network& net) {
  for (std::size_t i = 0; i < poses.size(); ++i) {
    phd.correct(specs[i], poses[i], fovs[i], measurements[i].z, models, net);
  }
}

}  // namespace hetmtt
