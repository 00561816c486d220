#pragma once

// Everything at once. Individual headers are independent and may be included
// on their own.

#include "hypermix/errors.hpp"
#include "hypermix/gallery.hpp"
#include "hypermix/jordan.hpp"
#include "hypermix/lp_grid.hpp"
#include "hypermix/mixing.hpp"
#include "hypermix/parallel.hpp"
#include "hypermix/seqspace.hpp"
#include "hypermix/tensor.hpp"
#include "hypermix/io/field_io.hpp"
