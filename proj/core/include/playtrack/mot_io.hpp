#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "playtrack/appearance.hpp"
#include "playtrack/detection.hpp"
#include "playtrack/errors.hpp"

namespace playtrack {

/// A box carrying an identity: a ground-truth object or a tracker output row.
struct LabeledBox {
    int id = 0;
    BoundingBox box;
    double score = 1.0;
};

/// frame index (1-based) -> boxes of that frame.
using LabeledFrames = std::map<int, std::vector<LabeledBox>>;

struct SequenceData {
    std::string name = "sequence";
    double image_width = 1920.0;
    double image_height = 1080.0;
    double fps = 25.0;
    int length = 0;  ///< number of frames; 0 means "up to the last frame with data"
    std::map<int, std::vector<Detection>> frames;
    std::optional<LabeledFrames> gt;

    /// Frames 1..last_frame() are processed by the tracker.
    [[nodiscard]] int last_frame() const;
};

struct ReadStats {
    std::size_t rows = 0;      ///< rows accepted
    std::size_t rejected = 0;  ///< rows dropped for negative width or height
};

/// Parses `frame, id, x, y, w, h, conf, ...` rows; extra columns are ignored.
/// Throws DataError naming the line on malformed rows.
SequenceData parse_detections(std::istream& in, const std::string& source = "<stream>",
                              ReadStats* stats = nullptr);
SequenceData read_detections(const std::string& path, ReadStats* stats = nullptr);

/// Ground truth `frame, id, x, y, w, h, flag, ...`: rows with flag 0 (ignore regions) are skipped.
LabeledFrames parse_ground_truth(std::istream& in, const std::string& source = "<stream>");
LabeledFrames read_ground_truth(const std::string& path);

/// Tracker result files: `frame, id, x, y, w, h, conf, ...`.
LabeledFrames parse_results(std::istream& in, const std::string& source = "<stream>");
LabeledFrames read_results(const std::string& path);

/// Rows `frame,id,x,y,w,h,conf,-1,-1,-1` sorted by (frame, id), two decimals.
void format_results(std::ostream& out, const LabeledFrames& results);
void write_results(const std::string& path, const LabeledFrames& results);

/// Detection file rows `frame,-1,x,y,w,h,conf,-1,-1,-1` in per-frame order.
void format_detections(std::ostream& out, const SequenceData& seq);
void write_detections(const std::string& path, const SequenceData& seq);

/// Ground-truth rows `frame,id,x,y,w,h,1,1,1`.
void write_ground_truth(const std::string& path, const LabeledFrames& gt);

using EmbeddingTable = std::map<std::pair<int, std::size_t>, AppearanceEmbedding>;

/// Embedding CSV: `frame,detection_index,v0,...,v{d-1}`; all rows share one dimension.
EmbeddingTable parse_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingTable read_embeddings(const std::string& path);
void write_embeddings(const std::string& path, const SequenceData& seq);

/// Attaches embeddings to detections by (frame, index within frame). Returns the count attached.
std::size_t attach_embeddings(SequenceData& seq, const EmbeddingTable& table);

/// seqinfo.ini with a [Sequence] section: name, frameRate, seqLength, imWidth, imHeight.
void read_seqinfo(const std::string& path, SequenceData& seq);
void write_seqinfo(const std::string& path, const SequenceData& seq);

/// Sequence directory layout: seqinfo.ini, det/det.txt, optional gt/gt.txt and
/// det/embeddings.csv.
SequenceData load_sequence_dir(const std::string& dir);
void write_sequence_dir(const std::string& dir, const SequenceData& seq);

}  // namespace playtrack
