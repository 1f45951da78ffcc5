#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace normy::serve_check {

struct ProbeResult {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct ContractReport {
    std::string endpoint;
    std::vector<ProbeResult> probes;

    bool ok() const;
    /// {"endpoint": str, "ok": bool, "probes": [{"name", "ok", "detail"}]}
    std::string to_json() const;
};

/// Sends the fixed probe payloads to a scorer sidecar and checks each
/// response against the wire contract. Never throws for sidecar faults;
/// they become failed probes.
ContractReport run(const std::string& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace normy::serve_check
