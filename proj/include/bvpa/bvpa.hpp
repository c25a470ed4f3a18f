#pragma once

#include "bvpa/blowup.hpp"
#include "bvpa/calibration.hpp"
#include "bvpa/error.hpp"
#include "bvpa/fieldlang.hpp"
#include "bvpa/fields.hpp"
#include "bvpa/functionals.hpp"
#include "bvpa/geometry.hpp"
#include "bvpa/interp.hpp"
#include "bvpa/io.hpp"
#include "bvpa/mesh.hpp"
#include "bvpa/piecewise_affine.hpp"
#include "bvpa/pipeline.hpp"
#include "bvpa/quadrature.hpp"
#include "bvpa/report.hpp"
#include "bvpa/value.hpp"
