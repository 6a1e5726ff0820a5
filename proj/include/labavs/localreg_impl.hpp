#pragma once

#include "labavs/errors.hpp"

namespace labavs {

template <class FitFn>
LocalFit fit_with_widening(Bandwidth bw, FitFn&& fit, int max_doublings) {
    for (int attempt = 0;; ++attempt) {
        try {
            return fit(bw);
        } catch (const DegenerateNeighborhood&) {
            if (attempt >= max_doublings) throw;
        }
        bool widened = false;
        for (auto* side : {&bw.lower, &bw.upper}) {
            for (auto& hw : *side) {
                if (!hw.is_infinite()) {
                    hw = HalfWidth(2.0 * hw.value());
                    widened = true;
                }
            }
        }
        if (!widened) return fit(bw);
    }
}

}  // namespace labavs
