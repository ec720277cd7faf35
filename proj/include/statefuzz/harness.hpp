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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "statefuzz/ftp_server.hpp"
#include "statefuzz/sut.hpp"

namespace statefuzz {

struct SutOptions {
  std::size_t depth_cap = kDefaultDepthCap;
  std::size_t map_size = kDefaultMapSize;
};

inline std::vector<std::string> sut_names() { return {"ftp-glob"}; }

inline std::unique_ptr<Sut> make_sut(std::string_view name, const SutOptions& options = {}) {
  if (name == "ftp-glob") {
    ftp::FtpOptions o;
    o.depth_cap = options.depth_cap;
    o.map_size = options.map_size;
    return std::make_unique<ftp::FtpGlobServer>(o);
  }
  throw ConfigError("unknown sut: " + std::string(name));
}

}  // namespace statefuzz
