#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sharp/sequence.h"

namespace sharp {

// Sequence dataset NDJSON: header
//   {"format":"sharp-sequences","version":1,"frame_dim":135}
// then one record per line:
//   {"sequence_id":..,"action_label":..,"split":"train","valid_count":..,
//    "frames":[[135 numbers], ...]}
// An empty file is an empty dataset.
std::vector<SequenceRecord> load_dataset(std::istream& in);
std::vector<SequenceRecord> load_dataset(const std::filesystem::path& path);
void save_dataset(std::ostream& out, const std::vector<SequenceRecord>& records);
void save_dataset(const std::filesystem::path& path, const std::vector<SequenceRecord>& records);

// Prepared 20 x 135 matrices as CSV: sequence_id,action_label,frame,v0..v134.
void export_prepared_csv(const std::filesystem::path& path,
                         const std::vector<SequenceRecord>& prepared);

// Uniformly subsampled / zero-padded copy of every record.
std::vector<SequenceRecord> prepare_uniform(const std::vector<SequenceRecord>& records,
                                            std::size_t n = kSeqLen);

}  // namespace sharp
