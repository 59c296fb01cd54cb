#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "altgda/dynamics.hpp"

namespace altgda {

struct InvariantResult {
  std::string name;
  bool active = true;   // regime preconditions met
  bool passed = true;
  double worst_slack = 0.0;  // min over checks of (allowed - observed)
  long long checks = 0;
  std::string detail;
};

struct AuditConfig {
  double tol = 1e-9;          // lemma inequalities
  double tight_tol = 1e-10;   // projection identities, residual sign
  double lemma4_tol = 1e-6;   // cumulative energy increase
  int probes_per_step = 100;  // Lemma-1 and pos-qtt probes
  long long probe_stride = 1;
  long long elementary_probes = 10000;
  std::uint64_t seed = 0;
};

struct AuditReport {
  std::vector<InvariantResult> invariants;
  bool passed() const;
  const InvariantResult* find(const std::string& name) const;
  std::string to_text() const;
  std::string to_json() const;
};

// Evaluates every applicable invariant on a trace with stored iterates.
// Invariants whose regime preconditions fail are reported inactive.
AuditReport audit_trace(const PayoffMatrix& a, const IterateTrace& trace,
                        const AuditConfig& cfg = {});

}  // namespace altgda
