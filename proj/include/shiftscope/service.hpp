// Copyright 2026 The Shiftscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHIFTSCOPE_SERVICE_HPP_
#define SHIFTSCOPE_SERVICE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "shiftscope/store_dir.hpp"

namespace httplib {
class Server;
}

namespace shiftscope {

struct HttpRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Read-only API over a loaded store plus the append-only findings journal.
// Routing is independent of the HTTP transport so it can be exercised
// directly; listen() binds it to a socket.
class Service {
 public:
  explicit Service(LoadedStore loaded);
  ~Service();

  HttpResponse handle(const HttpRequest& request) const;

  // Blocks until stop(). Throws PortUnavailable when the bind fails.
  void listen(const std::string& host, int port);
  // Bind without serving; follow with listen_bound(). bind_any picks a free
  // port and returns it.
  void bind(const std::string& host, int port);
  int bind_any(const std::string& host);
  void listen_bound();
  void stop();

  const LoadedStore& loaded() const { return loaded_; }

 private:
  HttpResponse get(const HttpRequest& request) const;
  HttpResponse post_finding(const HttpRequest& request) const;
  void install_routes();

  LoadedStore loaded_;
  mutable std::mutex journal_mutex_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace shiftscope

#endif  // SHIFTSCOPE_SERVICE_HPP_
