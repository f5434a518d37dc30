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

#include "v2g/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace v2g {

void Tariffs::check() const {
  if (!(p_gs > 0.0) || !(p_gb > 0.0) || !std::isfinite(p_gb)) {
    throw ConfigError("tariffs must be positive");
  }
  if (!(p_gs < p_gb)) throw ConfigError("grid sell price must be below grid buy price");
}

double split_price(const Tariffs& t) { return (t.p_gb + t.p_gs) / 2.0; }

double ev_resale_price(double cost_basis_p_per_kwh, const Tariffs& t) {
  const double marked_up = (1.0 + kEvResaleMargin) * cost_basis_p_per_kwh;
  return std::max(t.p_gs, std::min(marked_up, t.p_gb));
}

Battery update_cost_basis(const Battery& b, double charged_kwh, double price_p_per_kwh) {
  if (!(charged_kwh > 0.0)) throw std::invalid_argument("charged energy must be positive");
  Battery out = b;
  // Rounding can leave the store a hair below the floor; treat that as empty.
  const double tradable = std::max(0.0, b.available_kwh());
  out.cost_basis_p_per_kwh =
      (b.cost_basis_p_per_kwh * tradable + price_p_per_kwh * charged_kwh) / (tradable + charged_kwh);
  out.soc_kwh = b.soc_kwh + charged_kwh;
  return out;
}

}  // namespace v2g
