#pragma once

#include "depbound/bounds.hpp"
#include "depbound/graph.hpp"
#include "depbound/patterns.hpp"
#include "depbound/sampler.hpp"
#include "depbound/verify.hpp"
