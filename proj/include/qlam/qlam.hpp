#pragma once

#include "qlam/cli.hpp"
#include "qlam/equational.hpp"
#include "qlam/error.hpp"
#include "qlam/generate.hpp"
#include "qlam/machine.hpp"
#include "qlam/mll.hpp"
#include "qlam/quantum.hpp"
#include "qlam/syntax.hpp"
#include "qlam/typing.hpp"
