#!/usr/bin/env python3
"""Independent big-integer oracle for ristretto255, its elligator2 map and lizard.

Affine arithmetic over Python integers; shares no code with the C++ library.
Run directly to print the golden vectors pinned in tests/test_lizard.cpp.
"""
import hashlib
import sys

P = 2**255 - 19
L = 2**252 + 27742317777372353535851937790883648493
D = (-121665 * pow(121666, P - 2, P)) % P
SQRT_M1 = pow(2, (P - 1) // 4, P)


def inv(x):
    return pow(x, P - 2, P)


def is_negative(x):
    return (x % P) & 1


def ct_abs(x):
    x %= P
    return (P - x) % P if is_negative(x) else x


def sqrt_ratio_m1(u, v):
    u %= P
    v %= P
    r = (u * pow(v, 3, P)) * pow(u * pow(v, 7, P), (P - 5) // 8, P) % P
    check = v * r * r % P
    correct = check == u
    flipped = check == (-u) % P
    flipped_i = check == (-u * SQRT_M1) % P
    if flipped or flipped_i:
        r = r * SQRT_M1 % P
    return (correct or flipped), ct_abs(r)


# The normative constant is the odd ("negative") root of a*d - 1.
SQRT_AD_MINUS_ONE = P - sqrt_ratio_m1((-D - 1) % P, 1)[1]
INVSQRT_A_MINUS_D = sqrt_ratio_m1(1, (-1 - D) % P)[1]
ONE_MINUS_D_SQ = (1 - D * D) % P
D_MINUS_ONE_SQ = (D - 1) * (D - 1) % P


def edwards_add(p1, p2):
    x1, y1 = p1
    x2, y2 = p2
    t = D * x1 * x2 * y1 * y2 % P
    x3 = (x1 * y2 + y1 * x2) * inv(1 + t) % P
    y3 = (y1 * y2 + x1 * x2) * inv(1 - t) % P
    return (x3, y3)


def scalar_mul(k, pt):
    acc = (0, 1)
    while k > 0:
        if k & 1:
            acc = edwards_add(acc, pt)
        pt = edwards_add(pt, pt)
        k >>= 1
    return acc


def decode(b):
    s = int.from_bytes(b, "little")
    if s >= P or is_negative(s):
        return None
    ss = s * s % P
    u1 = (1 - ss) % P
    u2 = (1 + ss) % P
    u2sq = u2 * u2 % P
    v = (-(D * u1 * u1) - u2sq) % P
    ok, invsqrt = sqrt_ratio_m1(1, v * u2sq)
    den_x = invsqrt * u2 % P
    den_y = invsqrt * den_x * v % P
    x = ct_abs(2 * s * den_x)
    y = u1 * den_y % P
    t = x * y % P
    if not ok or is_negative(t) or y == 0:
        return None
    return (x, y)


def encode(pt):
    x0, y0 = pt
    z0 = 1
    t0 = x0 * y0 % P
    u1 = (z0 + y0) * (z0 - y0) % P
    u2 = x0 * y0 % P
    _, invsqrt = sqrt_ratio_m1(1, u1 * u2 * u2)
    den1 = invsqrt * u1 % P
    den2 = invsqrt * u2 % P
    z_inv = den1 * den2 * t0 % P
    if is_negative(t0 * z_inv):
        x, y = y0 * SQRT_M1 % P, x0 * SQRT_M1 % P
        den_inv = den1 * INVSQRT_A_MINUS_D % P
    else:
        x, y = x0, y0
        den_inv = den2
    if is_negative(x * z_inv):
        y = (-y) % P
    s = ct_abs(den_inv * (z0 - y))
    return s.to_bytes(32, "little")


def equal(p1, p2):
    x1, y1 = p1
    x2, y2 = p2
    return (x1 * y2 - y1 * x2) % P == 0 or (y1 * y2 - x1 * x2) % P == 0


def ell2(t):
    """Ristretto255 elligator2 map of one field element, affine output."""
    r = SQRT_M1 * t * t % P
    u = (r + 1) * ONE_MINUS_D_SQ % P
    v = (-1 - r * D) * (r + D) % P
    was_square, s = sqrt_ratio_m1(u, v)
    s_prime = (-ct_abs(s * t)) % P
    if not was_square:
        s = s_prime
        c = r
    else:
        c = P - 1
    n = (c * (r - 1) * D_MINUS_ONE_SQ - v) % P
    w0 = 2 * s * v % P
    w1 = n * SQRT_AD_MINUS_ONE % P
    w2 = (1 - s * s) % P
    w3 = (1 + s * s) % P
    return (w0 * inv(w1) % P, w2 * inv(w3) % P)


BASE = decode(bytes.fromhex(
    "e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76"))


def lizard_field_element(w):
    digest = hashlib.sha256(w).digest()
    hbits = int.from_bytes(digest, "little") % (1 << 125)
    return 2 * (int.from_bytes(w, "little") + (hbits << 128))


def lizard_encode(w):
    return encode(ell2(lizard_field_element(w)))


def ell2_preimage_brute_check(pt, candidates):
    return [t for t in candidates if equal(ell2(t), pt)]


def ell2_inverse(pt):
    """All t with ell2(t) == pt, found by inverting the map on each of the
    four Edwards representatives and filtering with the forward map."""
    x, y = pt
    reps = [(x, y), (-x % P, -y % P),
            (SQRT_M1 * y % P, SQRT_M1 * x % P), (-SQRT_M1 * y % P, -SQRT_M1 * x % P)]
    found = set()
    for rx, ry in reps:
        if (ry + 1) % P == 0 or rx == 0:
            continue
        ok, s0 = sqrt_ratio_m1((1 - ry) % P, (1 + ry) % P)
        if not ok:
            continue
        for s in (s0, -s0 % P):
            k = 2 * s * inv(rx * SQRT_AD_MINUS_ONE) % P
            if (k + 1) % P == 0:
                continue
            base = s * s * (D - 1) * inv((k + 1) * (D + 1)) % P
            for q in (base, -base % P):
                if (q - 1) % P == 0:
                    continue
                r = (q + 1) * inv(q - 1) % P
                ok, t = sqrt_ratio_m1(-SQRT_M1 * r % P, 1)
                if ok:
                    found.update(ell2_preimage_brute_check(pt, [t, -t % P]))
    return found


def main():
    vectors = [
        bytes(16),
        bytes([0xff] * 16),
        bytes.fromhex("00000000000000000000ffffc0000201"),
        bytes.fromhex("20010db8000000000000000000000001"),
        bytes(range(16)),
        bytes.fromhex("00000000000000000000000000000001"),
    ]
    assert encode(BASE).hex() == \
        "e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76"
    assert encode(scalar_mul(2, BASE)).hex() == \
        "6a493210f7499cd17fecb510ae0cea23a110e8d5b901f8acadd3095c73a3b919"
    assert equal(scalar_mul(L, BASE), (0, 1))
    for w in vectors:
        print(w.hex(), lizard_encode(w).hex())
    if len(sys.argv) > 1 and sys.argv[1] == "--ell2":
        for t in [0, 1, 2, 12345678901234567890, P - 3]:
            pt = ell2(t)
            print(t.to_bytes(32, "little").hex(), encode(pt).hex(), len(ell2_inverse(pt)))
    if len(sys.argv) > 1 and sys.argv[1] == "--mul":
        for k in [3, 1000, L - 1, 2**200 + 7]:
            print(k.to_bytes(32, "little").hex(), encode(scalar_mul(k, BASE)).hex())


if __name__ == "__main__":
    main()
