#pragma once

#include "affine_pr/constructions.hpp"
#include "affine_pr/ensemble.hpp"
#include "affine_pr/errors.hpp"
#include "affine_pr/experiments.hpp"
#include "affine_pr/forward_map.hpp"
#include "affine_pr/injectivity.hpp"
#include "affine_pr/linalg.hpp"
#include "affine_pr/recovery.hpp"
#include "affine_pr/rng.hpp"
#include "affine_pr/serialization.hpp"
