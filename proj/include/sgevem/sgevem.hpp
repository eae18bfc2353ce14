#pragma once

#include "sgevem/common.hpp"
#include "sgevem/quadrature.hpp"
#include "sgevem/mesh.hpp"
#include "sgevem/mesh_io.hpp"
#include "sgevem/cvt.hpp"
#include "sgevem/poly.hpp"
#include "sgevem/vem_local.hpp"
#include "sgevem/dof_map.hpp"
#include "sgevem/assembly.hpp"
#include "sgevem/manufactured.hpp"
#include "sgevem/interpolation.hpp"
#include "sgevem/errors.hpp"
#include "sgevem/study.hpp"
#include "sgevem/checks.hpp"
