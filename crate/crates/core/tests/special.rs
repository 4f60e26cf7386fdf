// Copyright 2026 The stokescell authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.


use stokescell::special::*;
use approx::assert_relative_eq;

#[test]
fn e1_reference_values() {
    // reference values computed with mpmath
    assert_relative_eq!(e1(0.5), 0.559_773_594_776_160_8, max_relative = 1e-14);
    assert_relative_eq!(e1(1.0), 0.219_383_934_395_520_27, max_relative = 1e-14);
    assert_relative_eq!(e1(2.0), 0.048_900_510_708_061_12, max_relative = 1e-13);
    assert_relative_eq!(e1(5.0), 0.001_148_295_591_275_325_7, max_relative = 1e-13);
    assert_relative_eq!(e1(20.0), 9.835_525_290_649_882e-11, max_relative = 1e-12);
}

#[test]
fn ein_matches_e1_across_switch() {
    for &u in &[1.9, 2.0, 2.1, 3.0] {
        assert_relative_eq!(ein(u), e1(u) + u.ln() + EULER_GAMMA, max_relative = 1e-13);
    }
    assert_relative_eq!(ein(1e-6), 1e-6 - 2.5e-13, max_relative = 1e-12);
}
