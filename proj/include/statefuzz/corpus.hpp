// Copyright 2026 The Statefuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Replay formats for request sequences.
//
//   .rseq  repeated frames of `u32 big-endian length || payload`
//   .txt   one message per line, '\n'-terminated; "\n" and "\\" escapes

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "statefuzz/error.hpp"
#include "statefuzz/protocol.hpp"

namespace statefuzz {

inline std::string encode_rseq(const RequestSequence& seq) {
  std::string out;
  for (const auto& m : seq.messages) {
    const auto n = static_cast<std::uint32_t>(m.payload.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out += m.payload;
  }
  return out;
}

inline RequestSequence decode_rseq(std::string_view bytes, const std::string& name = "<memory>") {
  RequestSequence seq;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4) {
      throw CorpusFormatError(name, pos, "truncated length prefix");
    }
    const auto b = [&](std::size_t i) {
      return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i]));
    };
    const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (n == 0) throw CorpusFormatError(name, pos, "zero-length message");
    if (n > bytes.size() - pos - 4) {
      throw CorpusFormatError(name, pos,
                              "frame declares " + std::to_string(n) + " bytes but only " +
                                  std::to_string(bytes.size() - pos - 4) + " remain");
    }
    seq.messages.emplace_back(std::string(bytes.substr(pos + 4, n)));
    pos += 4 + n;
  }
  if (seq.empty()) throw CorpusFormatError(name, 0, "no messages");
  return seq;
}

inline std::string escape_line(std::string_view payload) {
  std::string out;
  out.reserve(payload.size());
  for (char c : payload) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// Returns false on a dangling or unknown escape.
inline bool unescape_line(std::string_view line, std::string& out) {
  out.clear();
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\') {
      out.push_back(line[i]);
      continue;
    }
    if (i + 1 == line.size()) return false;
    const char e = line[++i];
    if (e == 'n') {
      out.push_back('\n');
    } else if (e == '\\') {
      out.push_back('\\');
    } else {
      return false;
    }
  }
  return true;
}

inline std::string encode_text(const RequestSequence& seq) {
  std::string out;
  for (const auto& m : seq.messages) {
    out += escape_line(m.payload);
    out.push_back('\n');
  }
  return out;
}

inline RequestSequence decode_text(std::string_view text, const std::string& name = "<memory>") {
  RequestSequence seq;
  std::size_t pos = 0;
  std::string payload;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    if (line.empty()) throw CorpusFormatError(name, pos, "zero-length message");
    if (!unescape_line(line, payload)) throw CorpusFormatError(name, pos, "bad escape");
    seq.messages.emplace_back(payload);
    pos = eol + 1;
  }
  if (seq.empty()) throw CorpusFormatError(name, 0, "no messages");
  return seq;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline RequestSequence load_sequence_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto ext = path.extension();
  if (ext == ".txt") return decode_text(bytes, path.string());
  return decode_rseq(bytes, path.string());
}

// Loads every `.rseq` and `.txt` file of `dir` in filename order. Other files
// are ignored.
inline std::vector<RequestSequence> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("corpus directory does not exist: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".rseq" || ext == ".txt") files.push_back(entry.path());
  }
  if (files.empty()) throw EmptyCorpusError("empty corpus: " + dir.string());
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  std::vector<RequestSequence> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_sequence_file(f));
  return out;
}

// One token per line with the text-format escapes; blank lines are skipped.
inline std::vector<std::string> load_dictionary(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  std::string token;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line(text.data() + pos, eol - pos);
    if (!line.empty()) {
      if (!unescape_line(line, token)) throw CorpusFormatError(path.string(), pos, "bad escape");
      tokens.push_back(token);
    }
    pos = eol + 1;
  }
  return tokens;
}

}  // namespace statefuzz
