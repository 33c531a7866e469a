#include "hashmem/page_store.hpp"

#include <algorithm>
#include <string>

#include "hashmem/errors.hpp"

namespace hashmem {

PageStore::PageStore(std::size_t page_capacity, std::uint32_t sliced_key_bits)
    : page_capacity_(page_capacity), sliced_key_bits_(std::min<std::uint32_t>(sliced_key_bits, 32)) {}

void PageStore::create(PageId id) {
  Page page{RowImage(page_capacity_), std::nullopt};
  if (has_sliced_layout()) page.sliced = bitslice_encode(page.row, sliced_key_bits_);
  if (!pages_.emplace(id, std::move(page)).second) {
    throw RangeError("page " + std::to_string(id) + " already allocated");
  }
}

void PageStore::release(PageId id) {
  if (pages_.erase(id) == 0) throw RangeError("page " + std::to_string(id) + " not allocated");
}

PageStore::Page& PageStore::at(PageId id) {
  auto it = pages_.find(id);
  if (it == pages_.end()) throw RangeError("page " + std::to_string(id) + " not allocated");
  return it->second;
}

const PageStore::Page& PageStore::at(PageId id) const {
  auto it = pages_.find(id);
  if (it == pages_.end()) throw RangeError("page " + std::to_string(id) + " not allocated");
  return it->second;
}

const RowImage& PageStore::row(PageId id) const { return at(id).row; }

const BitSlicedRegion& PageStore::sliced(PageId id) const {
  const Page& page = at(id);
  if (!page.sliced) throw UsageError("page store keeps no bit-sliced layout");
  return *page.sliced;
}

void PageStore::write_slot(PageId id, std::size_t index, const Slot& slot) {
  Page& page = at(id);
  if (index >= page_capacity_) throw RangeError("slot index outside page");
  if (page.sliced) {
    if (slot.state == SlotState::Occupied && sliced_key_bits_ < 32 &&
        (slot.key >> sliced_key_bits_) != 0) {
      throw RangeError("key " + std::to_string(slot.key) + " wider than " +
                       std::to_string(sliced_key_bits_) + "-bit PE key planes");
    }
    BitSlicedRegion& r = *page.sliced;
    const bool occupied = slot.state == SlotState::Occupied;
    r.occupancy.set(index, occupied);
    r.tombstones.set(index, slot.state == SlotState::Tombstone);
    for (std::uint32_t b = 0; b < r.key_planes.size(); ++b) {
      r.key_planes[b].set(index, occupied && ((slot.key >> b) & 1u));
    }
    for (std::uint32_t b = 0; b < r.value_planes.size(); ++b) {
      r.value_planes[b].set(index, occupied && ((slot.value >> b) & 1u));
    }
  }
  page.row[index] = slot;
}

void PageStore::write_row(PageId id, const RowImage& row) {
  if (row.capacity() != page_capacity_) throw RangeError("row capacity mismatch");
  Page& page = at(id);
  if (page.sliced) page.sliced = bitslice_encode(row, sliced_key_bits_);
  page.row = row;
}

std::vector<PageId> PageStore::page_ids() const {
  std::vector<PageId> ids;
  ids.reserve(pages_.size());
  for (const auto& [id, page] : pages_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace hashmem
