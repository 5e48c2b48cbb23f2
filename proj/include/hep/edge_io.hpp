#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hep/common.hpp"

namespace hep {

// Sequential edge supplier supporting multiple passes. The binary on-disk
// format is headerless: consecutive (src, dst) pairs of little-endian
// unsigned ids, 4 or 8 bytes each depending on the instantiation.
template <class Vid>
class EdgeSource {
 public:
  virtual ~EdgeSource() = default;
  virtual void rewind() = 0;
  virtual bool next(Edge<Vid> &e) = 0;
};

template <class Vid>
class FileEdgeSource final : public EdgeSource<Vid> {
 public:
  static constexpr std::size_t kRecordBytes = 2 * sizeof(Vid);

  explicit FileEdgeSource(std::string path) : path_(std::move(path)) {
    f_ = std::fopen(path_.c_str(), "rb");
    if (!f_) throw IoError("cannot open edge file: " + path_);
    std::uint64_t bytes = std::filesystem::file_size(path_);
    if (bytes % kRecordBytes != 0) {
      std::fclose(f_);
      f_ = nullptr;
      throw IngestError("truncated edge record in " + path_ + " at byte offset " +
                        std::to_string(bytes - bytes % kRecordBytes));
    }
    buf_.resize(kBufRecords * kRecordBytes);
  }

  ~FileEdgeSource() override {
    if (f_) std::fclose(f_);
  }

  FileEdgeSource(const FileEdgeSource &) = delete;
  FileEdgeSource &operator=(const FileEdgeSource &) = delete;

  void rewind() override {
    std::fseek(f_, 0, SEEK_SET);
    fill_ = pos_ = 0;
  }

  bool next(Edge<Vid> &e) override {
    if (pos_ == fill_) {
      fill_ = std::fread(buf_.data(), kRecordBytes, kBufRecords, f_);
      pos_ = 0;
      if (fill_ == 0) return false;
    }
    const unsigned char *p = buf_.data() + pos_ * kRecordBytes;
    e.src = le_load<Vid>(p);
    e.dst = le_load<Vid>(p + sizeof(Vid));
    ++pos_;
    return true;
  }

 private:
  static constexpr std::size_t kBufRecords = 1 << 16;
  std::string path_;
  std::FILE *f_ = nullptr;
  std::vector<unsigned char> buf_;
  std::size_t fill_ = 0, pos_ = 0;
};

template <class Vid>
class VectorEdgeSource final : public EdgeSource<Vid> {
 public:
  explicit VectorEdgeSource(std::vector<Edge<Vid>> edges) : edges_(std::move(edges)) {}
  void rewind() override { i_ = 0; }
  bool next(Edge<Vid> &e) override {
    if (i_ == edges_.size()) return false;
    e = edges_[i_++];
    return true;
  }
  const std::vector<Edge<Vid>> &edges() const { return edges_; }

 private:
  std::vector<Edge<Vid>> edges_;
  std::size_t i_ = 0;
};

template <class Vid>
class EdgeFileWriter {
 public:
  explicit EdgeFileWriter(std::string path) : path_(std::move(path)) {
    f_ = std::fopen(path_.c_str(), "wb");
    if (!f_) throw IoError("cannot create edge file: " + path_);
    buf_.reserve(kFlushBytes + 2 * sizeof(Vid));
  }

  ~EdgeFileWriter() {
    if (f_) {
      flush();
      std::fclose(f_);
    }
  }

  EdgeFileWriter(const EdgeFileWriter &) = delete;
  EdgeFileWriter &operator=(const EdgeFileWriter &) = delete;

  void append(const Edge<Vid> &e) {
    unsigned char rec[2 * sizeof(Vid)];
    le_store<Vid>(rec, e.src);
    le_store<Vid>(rec + sizeof(Vid), e.dst);
    buf_.insert(buf_.end(), rec, rec + sizeof(rec));
    ++count_;
    if (buf_.size() >= kFlushBytes) flush();
  }

  std::uint64_t count() const { return count_; }

  void close() {
    flush();
    if (std::fclose(f_) != 0) {
      f_ = nullptr;
      throw IoError("write failure on " + path_);
    }
    f_ = nullptr;
  }

 private:
  void flush() {
    if (buf_.empty()) return;
    if (std::fwrite(buf_.data(), 1, buf_.size(), f_) != buf_.size())
      throw IoError("write failure on " + path_);
    buf_.clear();
  }

  static constexpr std::size_t kFlushBytes = 1 << 20;
  std::string path_;
  std::FILE *f_ = nullptr;
  std::vector<unsigned char> buf_;
  std::uint64_t count_ = 0;
};

template <class Vid>
void write_edge_file(const std::string &path, const std::vector<Edge<Vid>> &edges) {
  EdgeFileWriter<Vid> w(path);
  for (const auto &e : edges) w.append(e);
  w.close();
}

// Holding pen for high-to-high edges: filled during CSR construction, read
// back by the streaming phase. File-backed in the real pipeline (same record
// format as the input), memory-backed for tests and the in-process API.
template <class Vid>
class SpillStore {
 public:
  virtual ~SpillStore() = default;
  virtual void append(const Edge<Vid> &e) = 0;
  virtual void finalize() = 0;  // no more appends; readable afterwards
  virtual std::uint64_t count() const = 0;
  virtual std::unique_ptr<EdgeSource<Vid>> open() = 0;
};

template <class Vid>
class FileSpillStore final : public SpillStore<Vid> {
 public:
  explicit FileSpillStore(std::string path, bool keep = false)
      : path_(std::move(path)), keep_(keep) {
    writer_ = std::make_unique<EdgeFileWriter<Vid>>(path_);
  }

  ~FileSpillStore() override {
    writer_.reset();
    if (!keep_) {
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
  }

  void append(const Edge<Vid> &e) override { writer_->append(e); }

  void finalize() override {
    count_ = writer_->count();
    writer_->close();
    writer_.reset();
  }

  std::uint64_t count() const override { return count_; }

  std::unique_ptr<EdgeSource<Vid>> open() override {
    return std::make_unique<FileEdgeSource<Vid>>(path_);
  }

  const std::string &path() const { return path_; }

 private:
  std::string path_;
  bool keep_;
  std::unique_ptr<EdgeFileWriter<Vid>> writer_;
  std::uint64_t count_ = 0;
};

template <class Vid>
class VectorSpillStore final : public SpillStore<Vid> {
 public:
  void append(const Edge<Vid> &e) override { edges_.push_back(e); }
  void finalize() override {}
  std::uint64_t count() const override { return edges_.size(); }
  std::unique_ptr<EdgeSource<Vid>> open() override {
    return std::make_unique<VectorEdgeSource<Vid>>(edges_);
  }
  const std::vector<Edge<Vid>> &edges() const { return edges_; }

 private:
  std::vector<Edge<Vid>> edges_;
};

}  // namespace hep
