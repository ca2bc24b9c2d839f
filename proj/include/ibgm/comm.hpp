#pragma once

/// @file comm.hpp
/// @brief In-process message passing between lockstep worker threads.
///
/// Each worker runs the same SPMD function with its own Comm handle. Messages
/// are byte buffers matched FIFO on (source, tag). A single-worker group runs
/// inline on the calling thread and its self-messages go through the same
/// mailbox, so the serial and partitioned runs share one code path. If any
/// worker throws, the group is aborted: blocked receives and barriers in the
/// other workers raise WorkerAborted and the original exception is rethrown
/// from Runtime::run.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "ibgm/errors.hpp"

namespace ibgm {

using Message = std::vector<std::byte>;

/// Fixed-width little-endian encoding helpers.
class Writer {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T> && (sizeof(T) == 4 || sizeof(T) == 8));
    std::array<std::byte, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }
  void put_doubles(std::span<const double> v) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto* p = reinterpret_cast<const std::byte*>(v.data());
      buf_.insert(buf_.end(), p, p + v.size_bytes());
    } else {
      for (double d : v) put(d);
    }
  }
  Message take() { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }

 private:
  Message buf_;
};

class Reader {
 public:
  explicit Reader(const Message& m) : m_(m) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > m_.size()) throw ProtocolError("message truncated");
    std::array<std::byte, sizeof(T)> bytes;
    std::memcpy(bytes.data(), m_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, bytes.data(), sizeof(T));
    return v;
  }
  void get_doubles(std::span<double> out) {
    if (pos_ + out.size_bytes() > m_.size()) throw ProtocolError("message truncated");
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), m_.data() + pos_, out.size_bytes());
      pos_ += out.size_bytes();
    } else {
      for (double& d : out) d = get<double>();
    }
  }
  bool done() const { return pos_ == m_.size(); }

 private:
  const Message& m_;
  std::size_t pos_ = 0;
};

class Runtime;

/// Per-worker communication handle.
class Comm {
 public:
  Comm(Runtime& rt, int rank) : rt_(&rt), rank_(rank) {}
  int rank() const { return rank_; }
  int size() const;

  void send(int dest, int tag, Message msg);
  Message recv(int src, int tag);
  void barrier();

  /// Sum over all workers, result on every worker.
  double allreduce_sum(double v);
  double allreduce_max(double v);
  long allreduce_sum(long v);
  /// Concatenation of every worker's buffer at rank 0 (empty elsewhere),
  /// in rank order.
  std::vector<Message> gather(Message mine, int tag);

 private:
  Runtime* rt_;
  int rank_;
};

class Runtime {
 public:
  explicit Runtime(int workers) : boxes_(workers) {
    if (workers < 1) throw ConfigError("worker count must be positive");
  }
  int size() const { return static_cast<int>(boxes_.size()); }

  /// Runs fn(comm) on every worker and joins. Rank 0 runs on the calling
  /// thread.
  void run(const std::function<void(Comm&)>& fn) {
    const int n = size();
    std::vector<std::exception_ptr> errors(n);
    auto body = [&](int r) {
      Comm c(*this, r);
      try {
        fn(c);
      } catch (const WorkerAborted&) {
        errors[r] = std::current_exception();
      } catch (...) {
        errors[r] = std::current_exception();
        abort_all();
      }
    };
    std::vector<std::thread> threads;
    for (int r = 1; r < n; ++r) threads.emplace_back(body, r);
    body(0);
    for (auto& t : threads) t.join();
    // Prefer the root-cause error over secondary WorkerAborted reports.
    std::exception_ptr first_abort;
    for (auto& e : errors) {
      if (!e) continue;
      try {
        std::rethrow_exception(e);
      } catch (const WorkerAborted&) {
        if (!first_abort) first_abort = e;
      } catch (...) {
        reset();
        std::rethrow_exception(e);
      }
    }
    reset();
    if (first_abort) std::rethrow_exception(first_abort);
  }

 private:
  friend class Comm;

  struct Mailbox {
    std::mutex mu;
    std::condition_variable cv;
    std::map<std::pair<int, int>, std::deque<Message>> queues;
  };

  void post(int dest, int src, int tag, Message msg) {
    auto& box = boxes_.at(dest);
    {
      std::lock_guard lock(box.mu);
      box.queues[{src, tag}].push_back(std::move(msg));
    }
    box.cv.notify_all();
  }

  Message take(int me, int src, int tag) {
    auto& box = boxes_.at(me);
    std::unique_lock lock(box.mu);
    const std::pair<int, int> key{src, tag};
    box.cv.wait(lock, [&] {
      if (aborted_.load()) return true;
      auto it = box.queues.find(key);
      return it != box.queues.end() && !it->second.empty();
    });
    if (aborted_.load()) throw WorkerAborted();
    auto& q = box.queues[key];
    Message m = std::move(q.front());
    q.pop_front();
    return m;
  }

  void wait_barrier() {
    std::unique_lock lock(bar_mu_);
    if (aborted_.load()) throw WorkerAborted();
    const long gen = bar_gen_;
    if (++bar_count_ == size()) {
      bar_count_ = 0;
      ++bar_gen_;
      bar_cv_.notify_all();
      return;
    }
    bar_cv_.wait(lock, [&] { return bar_gen_ != gen || aborted_.load(); });
    if (bar_gen_ == gen) throw WorkerAborted();
  }

  void abort_all() {
    aborted_.store(true);
    for (auto& b : boxes_) {
      std::lock_guard lock(b.mu);
      b.cv.notify_all();
    }
    std::lock_guard lock(bar_mu_);
    bar_cv_.notify_all();
  }

  void reset() {
    aborted_.store(false);
    for (auto& b : boxes_) b.queues.clear();
    bar_count_ = 0;
  }

  std::vector<Mailbox> boxes_;
  std::atomic<bool> aborted_{false};
  std::mutex bar_mu_;
  std::condition_variable bar_cv_;
  int bar_count_ = 0;
  long bar_gen_ = 0;
};

inline int Comm::size() const { return rt_->size(); }
inline void Comm::send(int dest, int tag, Message msg) { rt_->post(dest, rank_, tag, std::move(msg)); }
inline Message Comm::recv(int src, int tag) { return rt_->take(rank_, src, tag); }
inline void Comm::barrier() { rt_->wait_barrier(); }

namespace tags {
inline constexpr int kReduce = 1;
inline constexpr int kBroadcast = 2;
inline constexpr int kGather = 3;
inline constexpr int kHalo = 100;       // + 2 * axis + direction
inline constexpr int kMigrate = 200;    // + neighbour offset code
inline constexpr int kLineGather = 300; // + axis
inline constexpr int kLineScatter = 310;
inline constexpr int kFieldGather = 400;
}  // namespace tags

namespace detail {
template <class T, class Op>
T allreduce(Comm& c, T v, Op op) {
  if (c.size() == 1) return v;
  if (c.rank() == 0) {
    for (int r = 1; r < c.size(); ++r) {
      Message m = c.recv(r, tags::kReduce);
      Reader rd(m);
      v = op(v, rd.get<T>());
    }
    for (int r = 1; r < c.size(); ++r) {
      Writer w;
      w.put(v);
      c.send(r, tags::kBroadcast, w.take());
    }
    return v;
  }
  Writer w;
  w.put(v);
  c.send(0, tags::kReduce, w.take());
  Message m = c.recv(0, tags::kBroadcast);
  Reader rd(m);
  return rd.get<T>();
}
}  // namespace detail

inline double Comm::allreduce_sum(double v) {
  return detail::allreduce(*this, v, [](double a, double b) { return a + b; });
}
inline double Comm::allreduce_max(double v) {
  return detail::allreduce(*this, v, [](double a, double b) { return a > b ? a : b; });
}
inline long Comm::allreduce_sum(long v) {
  return detail::allreduce(*this, static_cast<std::int64_t>(v),
                           [](std::int64_t a, std::int64_t b) { return a + b; });
}

inline std::vector<Message> Comm::gather(Message mine, int tag) {
  std::vector<Message> out;
  if (rank_ != 0) {
    send(0, tag, std::move(mine));
    return out;
  }
  out.resize(size());
  out[0] = std::move(mine);
  for (int r = 1; r < size(); ++r) out[r] = recv(r, tag);
  return out;
}

}  // namespace ibgm
