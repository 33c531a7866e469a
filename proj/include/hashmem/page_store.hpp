#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hashmem/dram.hpp"
#include "hashmem/pe.hpp"

namespace hashmem {

/// Backing contents of the allocated pages. Each page is kept in the
/// element-oriented layout and, when requested, mirrored in the bit-sliced
/// layout the performance-optimized PE reads.
class PageStore {
 public:
  /// `sliced_key_bits` == 0 disables the bit-sliced mirror.
  explicit PageStore(std::size_t page_capacity, std::uint32_t sliced_key_bits = 0);

  std::size_t page_capacity() const { return page_capacity_; }
  bool has_sliced_layout() const { return sliced_key_bits_ != 0; }

  void create(PageId id);
  void release(PageId id);
  bool contains(PageId id) const { return pages_.contains(id); }
  std::size_t page_count() const { return pages_.size(); }

  const RowImage& row(PageId id) const;
  const BitSlicedRegion& sliced(PageId id) const;

  /// Writes one slot in every maintained layout.
  void write_slot(PageId id, std::size_t index, const Slot& slot);
  /// Replaces the whole page.
  void write_row(PageId id, const RowImage& row);

  std::vector<PageId> page_ids() const;

 private:
  struct Page {
    RowImage row;
    std::optional<BitSlicedRegion> sliced;
  };

  Page& at(PageId id);
  const Page& at(PageId id) const;

  std::size_t page_capacity_;
  std::uint32_t sliced_key_bits_;
  std::unordered_map<PageId, Page> pages_;
};

}  // namespace hashmem
