#pragma once

#include <cstddef>
#include <memory>
#include <new>
#include <utility>
#include <vector>

namespace nlb {

// Chunked object pool with stable addresses: elements are constructed into
// fixed-size blocks and live until clear(), which destroys the elements but
// keeps the blocks. A protocol run allocates thousands of short-lived boxes
// and randomness streams; recycling one pool across runs keeps all of that
// off the heap after the first trial.
template <typename T>
class Pool {
 public:
  Pool() = default;
  Pool(const Pool&) = delete;
  Pool& operator=(const Pool&) = delete;
  ~Pool() { clear(); }

  template <typename... Args>
  T& emplace(Args&&... args) {
    const size_t block = size_ / kBlock;
    const size_t slot = size_ % kBlock;
    if (block == blocks_.size()) {
      blocks_.emplace_back(std::make_unique<Slot[]>(kBlock));
    }
    T* element = std::launder(reinterpret_cast<T*>(blocks_[block][slot].bytes));
    new (element) T(std::forward<Args>(args)...);
    ++size_;
    return *element;
  }

  size_t size() const { return size_; }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (size_t i = 0; i < size_; ++i) {
      fn(*std::launder(
          reinterpret_cast<const T*>(blocks_[i / kBlock][i % kBlock].bytes)));
    }
  }

  void clear() {
    for (size_t i = 0; i < size_; ++i) {
      std::launder(reinterpret_cast<T*>(blocks_[i / kBlock][i % kBlock].bytes))
          ->~T();
    }
    size_ = 0;
  }

 private:
  static constexpr size_t kBlock = 256;
  struct Slot {
    alignas(T) unsigned char bytes[sizeof(T)];
  };
  std::vector<std::unique_ptr<Slot[]>> blocks_;
  size_t size_ = 0;
};

}  // namespace nlb
