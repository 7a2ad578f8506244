"""Berlekamp-Massey over GF(2^m)."""


def berlekamp_massey(field, syndromes):
    """Shortest LFSR (connection polynomial, length) generating ``syndromes``.

    The connection polynomial is returned lowest degree first with a
    leading 1, i.e. the error locator Lambda(x) = 1 + l_1 x + ... .
    """
    conn = [1]
    prev = [1]
    length = 0
    shift = 1
    prev_disc = 1
    for r, s in enumerate(syndromes):
        disc = s
        for i in range(1, length + 1):
            if i < len(conn) and conn[i]:
                disc ^= field.mul(conn[i], syndromes[r - i])
        if disc == 0:
            shift += 1
            continue
        coef = field.div(disc, prev_disc)
        update = [0] * shift + [field.mul(coef, c) for c in prev]
        new = conn + [0] * max(0, len(update) - len(conn))
        for i, c in enumerate(update):
            new[i] ^= c
        if 2 * length <= r:
            prev = conn
            length = r + 1 - length
            prev_disc = disc
            shift = 1
        else:
            shift += 1
        conn = new
    while len(conn) > 1 and conn[-1] == 0:
        conn.pop()
    return conn, length
