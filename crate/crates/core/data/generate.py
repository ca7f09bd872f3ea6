"""Regenerates the shipped parity-check matrices.

ccsds_128_64.alist: the (128,64) CCSDS short code built from its 16x16
circulant blocks (each entry lists the shifts of the identity summed into
that block).

peg_64_32.alist: a (3,6)-regular (64,32) code from progressive edge growth,
keeping the seed with the largest girth and then the fewest shortest cycles.

Run from this directory: python3 generate.py
"""
import random
import collections
M=16
rows=[[[0,7],[2],[14],[6],[],[0],[13],[0]],
      [[6],[0,15],[0],[1],[0],[],[0],[7]],
      [[4],[1],[0,15],[14],[11],[0],[],[3]],
      [[0],[1],[9],[0,13],[14],[1],[0],[]]]
H=[[0]*128 for _ in range(64)]
for br,row in enumerate(rows):
    for bc,shifts in enumerate(row):
        for s in shifts:
            for i in range(M):
                H[br*M+i][bc*M+(i+s)%M]^=1
def girth(H):
    m=len(H); n=len(H[0])
    adj=collections.defaultdict(list)
    for r in range(m):
        for c in range(n):
            if H[r][c]: adj[('c',r)].append(('v',c)); adj[('v',c)].append(('c',r))
    best=None; tot=0
    res={}
    for s in adj:
        dist={s:0}; sig={s:1}; q=collections.deque([s])
        while q:
            u=q.popleft()
            for w in adj[u]:
                if w not in dist: dist[w]=dist[u]+1; sig[w]=sig[u]; q.append(w)
                elif dist[w]==dist[u]+1: sig[w]+=sig[u]
        for t,d in dist.items():
            if sig[t]>=2: res.setdefault(d,0); res[d]+=sig[t]*(sig[t]-1)//2
    k=min(res); return 2*k, res[k]//(2*k)
def alist(H,f):
    m=len(H); n=len(H[0])
    cols=[[r+1 for r in range(m) if H[r][c]] for c in range(n)]
    rws=[[c+1 for c in range(n) if H[r][c]] for r in range(m)]
    out=[f"{n} {m}", f"{max(map(len,cols))} {max(map(len,rws))}", " ".join(str(len(c)) for c in cols), " ".join(str(len(r)) for r in rws)]
    out+= [" ".join(map(str,c)) for c in cols]
    out+= [" ".join(map(str,r)) for r in rws]
    open(f,"w").write("\n".join(out)+"\n")
alist(H, "ccsds_128_64.alist")
print("ccsds", girth(H))


def peg(n=64,m=32,dv=3,dc=6,seed=1):
    rnd=random.Random(seed)
    vn=[[] for _ in range(n)]; cn=[[] for _ in range(m)]
    for v in range(n):
        for k in range(dv):
            if k==0:
                cands=[c for c in range(m) if len(cn[c])<dc]
                mind=min(len(cn[c]) for c in cands)
                c=rnd.choice([c for c in cands if len(cn[c])==mind])
            else:
                # BFS from v
                seen_c=set(vn[v]); frontier=set(vn[v]); seen_v={v}
                while True:
                    nv=set()
                    for c in frontier:
                        for u in cn[c]:
                            if u not in seen_v: nv.add(u); seen_v.add(u)
                    nc=set()
                    for u in nv:
                        for c in vn[u]:
                            if c not in seen_c: nc.add(c)
                    avail=[c for c in range(m) if c not in seen_c and c not in nc and len(cn[c])<dc]
                    if not nc or not avail:
                        pool=[c for c in range(m) if c not in seen_c and len(cn[c])<dc] if not nc else [c for c in range(m) if c not in seen_c and len(cn[c])<dc]
                        if not nc and avail: pool=avail
                        break
                    seen_c|=nc; frontier=nc
                mind=min(len(cn[c]) for c in pool)
                c=rnd.choice([c for c in pool if len(cn[c])==mind])
            vn[v].append(c); cn[c].append(v)
    H=[[0]*n for _ in range(m)]
    for v in range(n):
        for c in vn[v]: H[c][v]=1
    return H
best=None
for s in range(1,40):
    H=peg(seed=s)
    if any(sum(r)!=6 for r in H): continue
    g=girth(H)
    if best is None or (g[0],-g[1])>(best[0][0],-best[0][1]): best=(g,s,H)
print("peg", best[0], "seed", best[1])
alist(best[2],"peg_64_32.alist")
