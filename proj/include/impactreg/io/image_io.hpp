/*=========================================================================
 *
 *  Copyright the impactreg contributors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#ifndef IMPACTREG_IO_IMAGE_IO_HPP
#define IMPACTREG_IO_IMAGE_IO_HPP

#include <string>

#include "impactreg/image/volume.hpp"

namespace impactreg {

/**
 * Volume file formats, selected by extension:
 *
 *   .mha / .mhd   MetaImage.  Uncompressed binary, little endian, element
 *                 types MET_FLOAT / MET_SHORT / MET_UCHAR, optional
 *                 ElementNumberOfChannels (channel-interleaved, matching the
 *                 in-memory layout).  .mha keeps the data in the header file
 *                 (ElementDataFile = LOCAL); .mhd references a sibling .raw.
 *                 Header metadata is text, so spacing and offset round-trip
 *                 at full double precision.
 *
 *   .nii          NIfTI-1, single file, uncompressed, little endian, data
 *                 types uint8 / int16 / float32.  Only axis-aligned geometry
 *                 is accepted: an sform must be a positive diagonal, a qform
 *                 must have a zero quaternion and non-negative qfac; anything
 *                 oblique or flipped is rejected with the offending field
 *                 named.  NIfTI stores spacing and origin as float32, so
 *                 metadata round-trips exactly only when the values are
 *                 float-representable.  Multi-channel volumes use dim[5]
 *                 (planar on disk, interleaved in memory).
 *
 * Compressed files (.gz, CompressedData = True) and ASCII MetaImage are
 * rejected with an IoError naming the unsupported feature.  Integer voxel
 * data is promoted to float32 on read; the original element type is reported
 * alongside the volume.
 */
enum class StoredDtype { kFloat32, kInt16, kUint8 };

/** Human-readable dtype name ("float32", "int16", "uint8"). */
std::string dtype_name(StoredDtype dtype);

struct VolumeFile {
  Volume volume;
  StoredDtype stored = StoredDtype::kFloat32;  // element type on disk
};

/** Reads a volume plus its on-disk element type; IoError on any problem. */
VolumeFile read_volume_file(const std::string& path);

/** Reads a volume, discarding the on-disk element type. */
Volume read_volume(const std::string& path);

/** Writes float32 voxels (MET_FLOAT / DT_FLOAT32); IoError on failure. */
void write_volume(const Volume& volume, const std::string& path);

/**
 * Reads a single-channel volume as a binary mask (any non-zero voxel is
 * inside).  Multi-channel files are rejected.
 */
Mask read_mask(const std::string& path);

/** Writes a mask with 0 / 1 voxels (MET_UCHAR / DT_UINT8). */
void write_mask(const Mask& mask, const std::string& path);

}  // namespace impactreg

#endif  // IMPACTREG_IO_IMAGE_IO_HPP
