#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "hep/common.hpp"

namespace hep {

template <class Vid>
struct AssignmentRecord {
  Vid u;
  Vid v;
  part_t part;
  friend bool operator==(const AssignmentRecord &a, const AssignmentRecord &b) {
    return a.u == b.u && a.v == b.v && a.part == b.part;
  }
};

// Where partitioners emit their decisions. Records arrive in assignment
// order; the sink keeps per-partition running counts for cross-checking.
template <class Vid>
class AssignmentSink {
 public:
  explicit AssignmentSink(std::uint32_t k) : counts_(k, 0) {}
  virtual ~AssignmentSink() = default;

  void append(Vid u, Vid v, part_t part) {
    ++counts_[part];
    ++total_;
    on_append(u, v, part);
  }

  const std::vector<std::uint64_t> &counts() const { return counts_; }
  std::uint64_t total() const { return total_; }
  std::uint32_t k() const { return static_cast<std::uint32_t>(counts_.size()); }

 protected:
  virtual void on_append(Vid u, Vid v, part_t part) = 0;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

template <class Vid>
class VectorAssignmentSink final : public AssignmentSink<Vid> {
 public:
  using AssignmentSink<Vid>::AssignmentSink;
  const std::vector<AssignmentRecord<Vid>> &records() const { return records_; }

 protected:
  void on_append(Vid u, Vid v, part_t part) override {
    records_.push_back({u, v, part});
  }

 private:
  std::vector<AssignmentRecord<Vid>> records_;
};

// Assignment file layout (all little-endian):
//   "EPAS"  magic
//   u32     format version (1)
//   u32     k
//   u32     id width in bytes (4 or 8)
//   u64     record count
// followed by fixed-width records (u, v, partition id), ids at the stated
// width, partition id 4 bytes.
struct AssignmentHeader {
  static constexpr char kMagic[4] = {'E', 'P', 'A', 'S'};
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kBytes = 24;

  std::uint32_t version = kVersion;
  std::uint32_t k = 0;
  std::uint32_t id_width = 4;
  std::uint64_t record_count = 0;

  void encode(unsigned char out[kBytes]) const {
    out[0] = 'E'; out[1] = 'P'; out[2] = 'A'; out[3] = 'S';
    le_store<std::uint32_t>(out + 4, version);
    le_store<std::uint32_t>(out + 8, k);
    le_store<std::uint32_t>(out + 12, id_width);
    le_store<std::uint64_t>(out + 16, record_count);
  }

  static AssignmentHeader decode(const unsigned char in[kBytes], const std::string &path) {
    if (in[0] != 'E' || in[1] != 'P' || in[2] != 'A' || in[3] != 'S')
      throw IngestError("not an assignment file (bad magic): " + path);
    AssignmentHeader h;
    h.version = le_load<std::uint32_t>(in + 4);
    h.k = le_load<std::uint32_t>(in + 8);
    h.id_width = le_load<std::uint32_t>(in + 12);
    h.record_count = le_load<std::uint64_t>(in + 16);
    if (h.version != kVersion)
      throw IngestError("unsupported assignment format version in " + path);
    if (h.id_width != 4 && h.id_width != 8)
      throw IngestError("unsupported id width in " + path);
    return h;
  }
};

template <class Vid>
class FileAssignmentSink final : public AssignmentSink<Vid> {
 public:
  FileAssignmentSink(std::string path, std::uint32_t k)
      : AssignmentSink<Vid>(k), path_(std::move(path)) {
    f_ = std::fopen(path_.c_str(), "wb");
    if (!f_) throw IoError("cannot create assignment file: " + path_);
    AssignmentHeader h;
    h.k = k;
    h.id_width = sizeof(Vid);
    unsigned char hdr[AssignmentHeader::kBytes];
    h.encode(hdr);
    if (std::fwrite(hdr, 1, sizeof(hdr), f_) != sizeof(hdr))
      throw IoError("write failure on " + path_);
    buf_.reserve(kFlushBytes + kRecordBytes);
  }

  ~FileAssignmentSink() override {
    if (f_) std::fclose(f_);  // finalize() not reached: leave a best-effort file
  }

  FileAssignmentSink(const FileAssignmentSink &) = delete;
  FileAssignmentSink &operator=(const FileAssignmentSink &) = delete;

  // Flushes records and patches the header's record count.
  void finalize() {
    flush();
    AssignmentHeader h;
    h.k = this->k();
    h.id_width = sizeof(Vid);
    h.record_count = this->total();
    unsigned char hdr[AssignmentHeader::kBytes];
    h.encode(hdr);
    if (std::fseek(f_, 0, SEEK_SET) != 0 ||
        std::fwrite(hdr, 1, sizeof(hdr), f_) != sizeof(hdr))
      throw IoError("write failure on " + path_);
    if (std::fclose(f_) != 0) {
      f_ = nullptr;
      throw IoError("write failure on " + path_);
    }
    f_ = nullptr;
  }

 protected:
  void on_append(Vid u, Vid v, part_t part) override {
    unsigned char rec[kRecordBytes];
    le_store<Vid>(rec, u);
    le_store<Vid>(rec + sizeof(Vid), v);
    le_store<part_t>(rec + 2 * sizeof(Vid), part);
    buf_.insert(buf_.end(), rec, rec + sizeof(rec));
    if (buf_.size() >= kFlushBytes) flush();
  }

 private:
  void flush() {
    if (buf_.empty()) return;
    if (std::fwrite(buf_.data(), 1, buf_.size(), f_) != buf_.size())
      throw IoError("write failure on " + path_);
    buf_.clear();
  }

  static constexpr std::size_t kRecordBytes = 2 * sizeof(Vid) + sizeof(part_t);
  static constexpr std::size_t kFlushBytes = 1 << 20;
  std::string path_;
  std::FILE *f_ = nullptr;
  std::vector<unsigned char> buf_;
};

// Reads the header without committing to an id width.
inline AssignmentHeader read_assignment_header(const std::string &path) {
  std::FILE *f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open assignment file: " + path);
  unsigned char hdr[AssignmentHeader::kBytes];
  std::size_t got = std::fread(hdr, 1, sizeof(hdr), f);
  std::fclose(f);
  if (got != sizeof(hdr)) throw IngestError("assignment file too short: " + path);
  return AssignmentHeader::decode(hdr, path);
}

template <class Vid>
class AssignmentFileReader {
 public:
  explicit AssignmentFileReader(const std::string &path) : path_(path) {
    header_ = read_assignment_header(path);
    if (header_.id_width != sizeof(Vid))
      throw ConfigError("assignment file " + path + " has " +
                        std::to_string(header_.id_width) +
                        "-byte ids; reader instantiated for " +
                        std::to_string(sizeof(Vid)) + "-byte ids");
    f_ = std::fopen(path.c_str(), "rb");
    if (!f_) throw IoError("cannot open assignment file: " + path);
    std::fseek(f_, AssignmentHeader::kBytes, SEEK_SET);
    buf_.resize(kBufRecords * kRecordBytes);
  }

  ~AssignmentFileReader() {
    if (f_) std::fclose(f_);
  }

  AssignmentFileReader(const AssignmentFileReader &) = delete;
  AssignmentFileReader &operator=(const AssignmentFileReader &) = delete;

  const AssignmentHeader &header() const { return header_; }

  bool next(AssignmentRecord<Vid> &r) {
    if (read_ == header_.record_count) return false;
    if (pos_ == fill_) {
      fill_ = std::fread(buf_.data(), kRecordBytes, kBufRecords, f_);
      pos_ = 0;
      if (fill_ == 0)
        throw IngestError("assignment file shorter than its header claims: " + path_);
    }
    const unsigned char *p = buf_.data() + pos_ * kRecordBytes;
    r.u = le_load<Vid>(p);
    r.v = le_load<Vid>(p + sizeof(Vid));
    r.part = le_load<part_t>(p + 2 * sizeof(Vid));
    ++pos_;
    ++read_;
    return true;
  }

 private:
  static constexpr std::size_t kRecordBytes = 2 * sizeof(Vid) + sizeof(part_t);
  static constexpr std::size_t kBufRecords = 1 << 16;
  std::string path_;
  AssignmentHeader header_;
  std::FILE *f_ = nullptr;
  std::vector<unsigned char> buf_;
  std::size_t fill_ = 0, pos_ = 0;
  std::uint64_t read_ = 0;
};

}  // namespace hep
