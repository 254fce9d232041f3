#pragma once

#include <cpgraph/baselines.hpp>
#include <cpgraph/bca.hpp>
#include <cpgraph/corescore.hpp>
#include <cpgraph/errors.hpp>
#include <cpgraph/glasso.hpp>
#include <cpgraph/metrics.hpp>
#include <cpgraph/model.hpp>
#include <cpgraph/random.hpp>
#include <cpgraph/simplex.hpp>
#include <cpgraph/synth.hpp>
#include <cpgraph/types.hpp>

namespace cpgraph {
inline constexpr const char* kVersion = "0.1.0";
}
