// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "phipsi/arith.hpp"
#include "phipsi/bigint.hpp"
#include "phipsi/constants.hpp"
#include "phipsi/error.hpp"
#include "phipsi/exact_ratio.hpp"
#include "phipsi/experiments.hpp"
#include "phipsi/factorization.hpp"
#include "phipsi/iterated_log.hpp"
#include "phipsi/sieve.hpp"
#include "phipsi/summation.hpp"
#include "phipsi/witness.hpp"
