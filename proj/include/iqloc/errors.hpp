// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IQLOC_ERRORS_HPP
#define IQLOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace iqloc
{
    // Base class for every error raised by the library
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class InvalidImbalance : public Error
    {
    public:
        using Error::Error;
    };

    class DimensionMismatch : public Error
    {
    public:
        using Error::Error;
    };

    class DegenerateGeometry : public Error
    {
    public:
        using Error::Error;
    };

    class GridTooCoarse : public Error
    {
    public:
        using Error::Error;
    };

    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    class IoError : public Error
    {
    public:
        using Error::Error;
    };

    // Raised when an information matrix cannot be inverted reliably.
    // condition() is the estimate on the diagonally equilibrated matrix (inf if singular).
    class IllConditioned : public Error
    {
    public:
        IllConditioned(const std::string &what, double condition)
            : Error(what + " (condition estimate " + std::to_string(condition) + ")"), condition_(condition) {}
        double condition() const noexcept { return condition_; }

    private:
        double condition_;
    };

    class NearSingularNuisanceBlock : public IllConditioned
    {
    public:
        explicit NearSingularNuisanceBlock(double condition)
            : IllConditioned("nuisance block of the FIM is near singular", condition) {}
    };

    class NearSingularLocationFim : public IllConditioned
    {
    public:
        explicit NearSingularLocationFim(double condition)
            : IllConditioned("location-domain FIM is near singular", condition) {}
    };
}

#endif
