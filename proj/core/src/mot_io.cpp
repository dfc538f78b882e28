#include "playtrack/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>

namespace playtrack {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

DataError row_error(const std::string& source, std::size_t line, const std::string& what) {
    return DataError(source + ":" + std::to_string(line) + ": " + what);
}

double to_double(std::string_view field, const std::string& source, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw row_error(source, line, "not a number: '" + std::string(field) + "'");
    }
    return v;
}

int to_int(std::string_view field, const std::string& source, std::size_t line) {
    const double v = to_double(field, source, line);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw row_error(source, line, "not an integer: '" + std::string(field) + "'");
    return i;
}

bool blank(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

struct Row {
    int frame;
    int id;
    BoundingBox box;
    double value;  // conf or flag column, 1 when absent
};

/// Shared reader for the three MOT row layouts. Returns false for rejected rows.
bool parse_row(std::string_view line, const std::string& source, std::size_t line_no, Row& row) {
    const auto f = split_fields(line);
    if (f.size() < 6) throw row_error(source, line_no, "expected at least 6 comma-separated fields");
    row.frame = to_int(f[0], source, line_no);
    if (row.frame < 1) throw row_error(source, line_no, "frame index must be >= 1");
    row.id = to_int(f[1], source, line_no);
    row.box = {to_double(f[2], source, line_no), to_double(f[3], source, line_no),
               to_double(f[4], source, line_no), to_double(f[5], source, line_no)};
    row.value = f.size() > 6 ? to_double(f[6], source, line_no) : 1.0;
    for (double v : row.box.as_array()) {
        if (!std::isfinite(v)) throw row_error(source, line_no, "non-finite coordinate");
    }
    return row.box.w >= 0.0 && row.box.h >= 0.0;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        fn(std::string_view(line), line_no);
    }
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    return out;
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    // Avoid "-0.00" so that formatting is stable across a read/write round trip.
    if (std::string_view(buf) == "-0.00") return "0.00";
    return buf;
}

LabeledFrames parse_labeled(std::istream& in, const std::string& source, bool skip_flag_zero) {
    LabeledFrames out;
    for_each_line(in, [&](std::string_view line, std::size_t line_no) {
        Row r{};
        if (!parse_row(line, source, line_no, r)) return;
        if (skip_flag_zero && r.value == 0.0) return;
        out[r.frame].push_back({r.id, r.box, skip_flag_zero ? 1.0 : r.value});
    });
    return out;
}

}  // namespace

int SequenceData::last_frame() const {
    int last = length;
    if (!frames.empty()) last = std::max(last, frames.rbegin()->first);
    if (gt && !gt->empty()) last = std::max(last, gt->rbegin()->first);
    return last;
}

SequenceData parse_detections(std::istream& in, const std::string& source, ReadStats* stats) {
    SequenceData seq;
    ReadStats local;
    for_each_line(in, [&](std::string_view line, std::size_t line_no) {
        Row r{};
        if (!parse_row(line, source, line_no, r)) {
            ++local.rejected;
            return;
        }
        ++local.rows;
        seq.frames[r.frame].push_back({r.box, r.value, std::nullopt});
    });
    if (stats) *stats = local;
    return seq;
}

SequenceData read_detections(const std::string& path, ReadStats* stats) {
    auto in = open_in(path);
    return parse_detections(in, path, stats);
}

LabeledFrames parse_ground_truth(std::istream& in, const std::string& source) {
    return parse_labeled(in, source, true);
}

LabeledFrames read_ground_truth(const std::string& path) {
    auto in = open_in(path);
    return parse_ground_truth(in, path);
}

LabeledFrames parse_results(std::istream& in, const std::string& source) {
    return parse_labeled(in, source, false);
}

LabeledFrames read_results(const std::string& path) {
    auto in = open_in(path);
    return parse_results(in, path);
}

void format_results(std::ostream& out, const LabeledFrames& results) {
    for (const auto& [frame, rows] : results) {
        std::vector<const LabeledBox*> sorted;
        for (const auto& r : rows) sorted.push_back(&r);
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const LabeledBox* a, const LabeledBox* b) { return a->id < b->id; });
        for (const LabeledBox* r : sorted) {
            out << frame << ',' << r->id << ',' << fixed2(r->box.x) << ',' << fixed2(r->box.y) << ','
                << fixed2(r->box.w) << ',' << fixed2(r->box.h) << ',' << fixed2(r->score)
                << ",-1,-1,-1\n";
        }
    }
}

void write_results(const std::string& path, const LabeledFrames& results) {
    auto out = open_out(path);
    format_results(out, results);
    if (!out) throw DataError("failed writing '" + path + "'");
}

void format_detections(std::ostream& out, const SequenceData& seq) {
    for (const auto& [frame, dets] : seq.frames) {
        for (const auto& d : dets) {
            out << frame << ",-1," << fixed2(d.box.x) << ',' << fixed2(d.box.y) << ','
                << fixed2(d.box.w) << ',' << fixed2(d.box.h) << ',' << fixed2(d.score)
                << ",-1,-1,-1\n";
        }
    }
}

void write_detections(const std::string& path, const SequenceData& seq) {
    auto out = open_out(path);
    format_detections(out, seq);
    if (!out) throw DataError("failed writing '" + path + "'");
}

void write_ground_truth(const std::string& path, const LabeledFrames& gt) {
    auto out = open_out(path);
    for (const auto& [frame, rows] : gt) {
        for (const auto& r : rows) {
            out << frame << ',' << r.id << ',' << fixed2(r.box.x) << ',' << fixed2(r.box.y) << ','
                << fixed2(r.box.w) << ',' << fixed2(r.box.h) << ",1,1,1\n";
        }
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source) {
    EmbeddingTable table;
    long dim = -1;
    for_each_line(in, [&](std::string_view line, std::size_t line_no) {
        const auto f = split_fields(line);
        if (f.size() < 3) throw row_error(source, line_no, "expected frame, detection_index and values");
        const int frame = to_int(f[0], source, line_no);
        const int index = to_int(f[1], source, line_no);
        if (frame < 1 || index < 0) throw row_error(source, line_no, "bad frame or detection index");
        const long n = static_cast<long>(f.size()) - 2;
        if (dim < 0) dim = n;
        if (n != dim) throw row_error(source, line_no, "embedding dimension differs from earlier rows");
        Eigen::VectorXd v(n);
        for (long k = 0; k < n; ++k) v[k] = to_double(f[static_cast<std::size_t>(k) + 2], source, line_no);
        if (!v.allFinite()) throw row_error(source, line_no, "non-finite embedding value");
        table[{frame, static_cast<std::size_t>(index)}] = AppearanceEmbedding(std::move(v));
    });
    return table;
}

EmbeddingTable read_embeddings(const std::string& path) {
    auto in = open_in(path);
    return parse_embeddings(in, path);
}

void write_embeddings(const std::string& path, const SequenceData& seq) {
    auto out = open_out(path);
    char buf[32];
    for (const auto& [frame, dets] : seq.frames) {
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (!dets[j].embedding) continue;
            out << frame << ',' << j;
            for (double v : dets[j].embedding->values()) {
                std::snprintf(buf, sizeof buf, "%.6g", v);
                out << ',' << buf;
            }
            out << '\n';
        }
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

std::size_t attach_embeddings(SequenceData& seq, const EmbeddingTable& table) {
    std::size_t attached = 0;
    for (auto& [frame, dets] : seq.frames) {
        for (std::size_t j = 0; j < dets.size(); ++j) {
            const auto it = table.find({frame, j});
            if (it == table.end()) continue;
            dets[j].embedding = it->second;
            ++attached;
        }
    }
    return attached;
}

void read_seqinfo(const std::string& path, SequenceData& seq) {
    auto in = open_in(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '[' || s.front() == ';' || s.front() == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw row_error(path, line_no, "expected key=value");
        const std::string key(trim(s.substr(0, eq)));
        const std::string_view value = trim(s.substr(eq + 1));
        if (key == "name") seq.name = std::string(value);
        else if (key == "frameRate") seq.fps = to_double(value, path, line_no);
        else if (key == "seqLength") seq.length = to_int(value, path, line_no);
        else if (key == "imWidth") seq.image_width = to_double(value, path, line_no);
        else if (key == "imHeight") seq.image_height = to_double(value, path, line_no);
    }
    if (!(seq.image_width > 0.0 && seq.image_height > 0.0)) {
        throw DataError(path + ": image size must be positive");
    }
}

void write_seqinfo(const std::string& path, const SequenceData& seq) {
    auto out = open_out(path);
    out << "[Sequence]\nname=" << seq.name << "\nframeRate=" << seq.fps
        << "\nseqLength=" << seq.last_frame() << "\nimWidth=" << seq.image_width
        << "\nimHeight=" << seq.image_height << "\n";
}

SequenceData load_sequence_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw DataError("not a sequence directory: '" + dir + "'");
    SequenceData seq = read_detections((root / "det" / "det.txt").string());
    if (fs::exists(root / "seqinfo.ini")) read_seqinfo((root / "seqinfo.ini").string(), seq);
    if (fs::exists(root / "gt" / "gt.txt")) seq.gt = read_ground_truth((root / "gt" / "gt.txt").string());
    if (fs::exists(root / "det" / "embeddings.csv")) {
        attach_embeddings(seq, read_embeddings((root / "det" / "embeddings.csv").string()));
    }
    return seq;
}

void write_sequence_dir(const std::string& dir, const SequenceData& seq) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root / "det");
    write_seqinfo((root / "seqinfo.ini").string(), seq);
    write_detections((root / "det" / "det.txt").string(), seq);
    const bool any_embedding = std::any_of(seq.frames.begin(), seq.frames.end(), [](const auto& kv) {
        return std::any_of(kv.second.begin(), kv.second.end(),
                           [](const Detection& d) { return d.embedding.has_value(); });
    });
    if (any_embedding) write_embeddings((root / "det" / "embeddings.csv").string(), seq);
    if (seq.gt) {
        fs::create_directories(root / "gt");
        write_ground_truth((root / "gt" / "gt.txt").string(), *seq.gt);
    }
}

}  // namespace playtrack
