/*
 * Copyright 2026 The v2gsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "v2g/domain.hpp"

namespace v2g {

/// Static grid tariffs in pence per kWh.
struct Tariffs {
  double p_gb = 29.49;  // buying from the grid
  double p_gs = 6.4;    // selling to the grid

  /// Throws ConfigError unless 0 < p_gs < p_gb.
  void check() const;
};

inline constexpr double kEvResaleMargin = 0.10;

/// Prosumer -> EV price: midpoint of the grid buy and sell tariffs.
double split_price(const Tariffs& t);

/// EV -> prosumer price: cost basis plus the fixed margin, clamped to
/// [p_gs, p_gb].
double ev_resale_price(double cost_basis_p_per_kwh, const Tariffs& t);

/// Volume-weighted average cost of the tradable store after charging
/// `charged_kwh` at `price`. Discharging leaves the basis unchanged, so no
/// counterpart exists for it. Throws std::invalid_argument unless
/// charged_kwh > 0.
Battery update_cost_basis(const Battery& b, double charged_kwh, double price_p_per_kwh);

}  // namespace v2g
